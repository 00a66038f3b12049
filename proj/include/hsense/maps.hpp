#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsense/numkit.hpp"

namespace hsense {

enum class MapKind { Permutation, Selection, Sign, SignedSelection, Explicit };

/// A linear map with a structured descriptor (entries in {0, +1, -1}) or an
/// explicit matrix, optionally post-composed with a sensing matrix A so the
/// map acts as x -> T(Ax).
class LinearMap {
 public:
  LinearMap() = default;

  /// Row k of the matrix is e_{perm[k]}^T; perm must be a bijection of [m].
  static LinearMap permutation(std::vector<int> perm);
  /// Row k is e_{rows[k]}^T with pairwise distinct rows[k] in [m]; rank r.
  static LinearMap selection(int m, std::vector<int> rows);
  /// diag(signs), signs in {+1,-1}.
  static LinearMap sign_map(std::vector<int> signs);
  /// Row k is signs[k] * e_{rows[k]}^T; equals S*B for the sign matrix B
  /// carrying signs[k] at coordinate rows[k].
  static LinearMap signed_selection(int m, std::vector<int> rows, std::vector<int> signs);
  static LinearMap explicit_matrix(MatR t);

  MapKind kind() const { return kind_; }
  int source_dim() const { return source_dim_; }
  int target_dim() const { return target_dim_; }
  bool is_composed() const { return static_cast<bool>(sensing_); }
  /// Dimension of the space the full map acts on (n when composed with A).
  int input_dim() const { return sensing_ ? static_cast<int>(sensing_->cols()) : source_dim_; }
  bool is_structured() const { return kind_ != MapKind::Explicit && !sensing_; }

  const std::vector<int>& indices() const { return indices_; }
  const std::vector<int>& signs() const { return signs_; }
  const MatR& sensing() const;

  /// Coordinate selected by output row k together with its sign.
  std::pair<int, int> row_action(int k) const;

  /// Exact rank of the structured part (r for selections, m otherwise);
  /// tolerance-based for explicit matrices.
  int structured_rank(const Tolerance& tol = {}) const;

  LinearMap composed_with(std::shared_ptr<const MatR> a) const;

  /// Dense matrix of the full map (T*A when composed).
  MatR matrix() const;
  /// Dense matrix of the structured part only.
  MatR structured_matrix() const;

  VecR apply(const VecR& x) const;

  std::string describe() const;

 private:
  MapKind kind_ = MapKind::Explicit;
  int source_dim_ = 0;
  int target_dim_ = 0;
  std::vector<int> indices_;  // perm or selected rows
  std::vector<int> signs_;
  MatR dense_;
  std::shared_ptr<const MatR> sensing_;
};

/// Zero-pads a matrix to square max(rows, cols); never changes the rank.
MatR extend_square(const MatR& t);
MatC extend_square_c(const MatC& t);

struct FamilyCapExceeded : std::runtime_error {
  FamilyCapExceeded(std::uint64_t card, std::uint64_t cap)
      : std::runtime_error("family cardinality " + std::to_string(card) +
                           " exceeds cap " + std::to_string(cap)),
        cardinality(card) {}
  std::uint64_t cardinality;
};

enum class FamilyKind { Permutations, Selections, Signs, SignedSelections, List };

/// A finite family of linear maps given by a descriptor. Members are ordered
/// lexicographically in their defining arrays and can be addressed by rank,
/// which makes enumeration, splitting and uniform sampling deterministic.
class MapFamily {
 public:
  static constexpr std::uint64_t kDefaultCap = 10'000'000;

  static MapFamily permutations(int m);
  static MapFamily selections(int r, int m);
  static MapFamily signs(int m);
  static MapFamily signed_selections(int r, int m);
  static MapFamily explicit_list(std::vector<LinearMap> maps);

  MapFamily composed_with(MatR a) const;

  FamilyKind kind() const { return kind_; }
  int m() const { return m_; }
  int r() const { return r_; }
  bool is_composed() const { return static_cast<bool>(sensing_); }
  std::shared_ptr<const MatR> sensing_ptr() const { return sensing_; }
  /// Dimension of the space members act on.
  int input_dim() const;
  int output_dim() const;

  std::uint64_t cardinality() const;

  /// Member with the given lexicographic rank.
  LinearMap at(std::uint64_t index) const;

  /// All members in order; throws FamilyCapExceeded beyond `cap`.
  std::vector<LinearMap> enumerate(std::uint64_t cap = kDefaultCap) const;

  LinearMap sample_one(Rng& rng) const;
  /// `count` i.i.d. uniform draws, reproducible from the seed.
  std::vector<LinearMap> sample(std::uint64_t seed, int count) const;

  std::string describe() const;

 private:
  FamilyKind kind_ = FamilyKind::List;
  int m_ = 0;
  int r_ = 0;
  std::vector<LinearMap> list_;
  std::shared_ptr<const MatR> sensing_;
};

/// Gaussian sensing matrix with a recorded seed.
MatR random_sensing_matrix(Index m, Index n, std::uint64_t seed);
SubspaceR random_subspace(Index n, Index d, std::uint64_t seed);
ArrangementR random_arrangement(const std::vector<int>& dims, Index n, std::uint64_t seed);

/// Compact family descriptors: "perm:5", "sel:3,5", "sign:4", "selsign:3,5".
MapFamily parse_family(const std::string& text);
/// Single-map descriptors: "perm:1,2,0", "sel:5:0,2", "sign:1,-1",
/// "selsign:5:0,2:1,-1".
LinearMap parse_map(const std::string& text);

}  // namespace hsense

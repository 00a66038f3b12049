#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "hsense/maps.hpp"
#include "hsense/numkit.hpp"

namespace hsense {

/// Exact root of unity exp(2*pi*i * num/den), reduced, 0 <= num < den.
struct RootOfUnity {
  long long num = 0;
  long long den = 1;
  Complex value() const;
  bool operator<(const RootOfUnity& o) const { return num * o.den < o.num * den; }
  bool operator==(const RootOfUnity& o) const { return num == o.num && den == o.den; }
};

enum class SpectrumMethod { Combinatorial, Numeric };

/// An isolated eigenvalue of the pencil (T1, T2): a lambda where
/// dim ker(T1 - lambda T2) jumps above the generic value.
struct EigCandidate {
  Complex lambda;
  std::optional<RootOfUnity> exact;  // set by the combinatorial method
  int eigdim = 0;
  bool is_zero = false;
  bool is_one = false;
  bool is_minus_one = false;
  bool inside_Z = false;  // E_lambda lies inside ker(t1-t2), ker t1 or ker t2
};

/// Eigenstructure summary of a map pair over C. `generic_dim` is
/// dim ker(T1 - lambda T2) for generic lambda; a positive value means the
/// pencil is singular. path_family_count counts the eigenvector families that
/// move continuously with lambda (generic_dim minus the common kernel).
struct PencilSpectrum {
  std::vector<EigCandidate> candidates;
  int ambient = 0;
  int ker1_dim = 0;
  int ker2_dim = 0;
  int ker_diff_dim = 0;  // dim E_1 = dim ker(T1 - T2)
  int ker_sum_dim = 0;   // dim E_{-1}
  int generic_dim = 0;
  int common_kernel_dim = 0;
  int path_family_count = 0;
  SpectrumMethod method = SpectrumMethod::Numeric;
  std::vector<std::string> diagnostics;

  bool singular_pencil() const { return generic_dim > 0; }
  bool has_path_family() const { return path_family_count > 0; }
};

/// ker(T1 - lambda T2) over C, after square extension.
SubspaceC eig_subspace(const LinearMap& t1, const LinearMap& t2, Complex lambda,
                       const Tolerance& tol = {});

/// Exact spectrum of a structured pair via the relation graph on coordinates.
/// Both maps must be structured (not explicit, not composed) and share source
/// and target dimensions. Row k of T1 w = lambda T2 w reads
/// s1_k w_{a_k} = lambda s2_k w_{b_k}; since every a_k is distinct and every
/// b_k is distinct, the relation graph has maximum degree 2 and decomposes
/// into simple paths and simple cycles. A path component solves for every
/// lambda != 0 (a one-parameter eigenvector family); a cycle imposes
/// lambda^e = sigma with integer net exponent e and sign product sigma, so its
/// lambdas are exact roots of unity. All bookkeeping is integer arithmetic.
PencilSpectrum spectrum_combinatorial(const LinearMap& t1, const LinearMap& t2);

/// Numeric spectrum for arbitrary maps: eigenvalues of the square-extended
/// pencil located as roots of a randomly compressed determinant polynomial,
/// clustered within tol_cluster and re-verified by a null-space computation at
/// each cluster center (so spurious roots cannot survive). Singular pencils
/// are detected from the generic kernel dimension and flagged.
PencilSpectrum spectrum_numeric(const LinearMap& t1, const LinearMap& t2,
                                const Tolerance& tol = {});

/// Combinatorial when the pair supports it, numeric otherwise.
PencilSpectrum spectrum_of(const LinearMap& t1, const LinearMap& t2, const Tolerance& tol = {});

/// dim of the quasi-variety U (or U_pm): candidates at lambda outside {0,1}
/// (and -1 for the sign variant) that are not inside Z contribute their
/// eigdim; a path family contributes generic_dim + 1. Returns -1 for empty.
int dim_U(const PencilSpectrum& spec, bool sign_variant);

struct PairCondition {
  std::size_t i = 0, j = 0;
  int dimU = 0;
  bool rank_ok = true;
  bool codim_ok = true;
};

struct Condition1Report {
  bool all_pass = false;
  int d = 0;
  bool sign_variant = false;
  std::size_t member_count = 0;
  int ambient = 0;
  std::uint64_t pairs_checked = 0;
  int max_dimU = -1;
  std::vector<std::size_t> rank_failures;
  std::vector<PairCondition> pair_failures;
};

struct Condition1Options {
  Tolerance tol{};
  bool sign_variant = false;
  std::uint64_t cap = MapFamily::kDefaultCap;
  int threads = 1;
};

/// Evaluates rank(tau) >= 2d for every member and n - dim_U >= d for every
/// pair (dim_U is symmetric in the pair, so unordered pairs cover the ordered
/// requirement).
Condition1Report check_condition_1(const MapFamily& family, int d,
                                   const Condition1Options& opts = {});

}  // namespace hsense

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hsense/rng.hpp"
#include "hsense/tolerance.hpp"

namespace hsense {

using Real = double;
using Complex = std::complex<double>;

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using MatR = Mat<Real>;
using MatC = Mat<Complex>;
using VecR = Vec<Real>;
using VecC = Vec<Complex>;

using Index = Eigen::Index;

inline MatC complexify(const MatR& m) { return m.cast<Complex>(); }

template <class S>
void require_finite(const Mat<S>& m, const char* who) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite entries");
}

/// Largest singular value; 0 for empty matrices.
template <class S>
double sigma_max(const Mat<S>& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return m.jacobiSvd().singularValues()(0);
}

/// Rank through a column-pivoted QR, counting diagonal entries of R against
/// the effective threshold. An independent route from the SVD-based rank_tol,
/// used to recheck rank certificates.
template <class S>
Index rank_qr(const Mat<S>& m, const Tolerance& tol = {}) {
  require_finite(m, "rank_qr");
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::ColPivHouseholderQR<Mat<S>> qr(m);
  const Index k = std::min(m.rows(), m.cols());
  const double top = std::abs(qr.matrixQR()(0, 0));
  const double thr = tol.threshold(top);
  Index r = 0;
  while (r < k && std::abs(qr.matrixQR()(r, r)) > thr) ++r;
  return r;
}

/// Number of singular values above the effective threshold.
template <class S>
Index rank_tol(const Mat<S>& m, const Tolerance& tol = {}) {
  require_finite(m, "rank_tol");
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Mat<S>> svd(m);
  const auto& sv = svd.singularValues();
  const double thr = tol.threshold(sv(0));
  Index r = 0;
  while (r < sv.size() && sv(r) > thr) ++r;
  return r;
}

/// A linear subspace of H^n held as an orthonormal basis; dim 0 is the zero
/// subspace with an n x 0 basis.
template <class S>
class Subspace {
 public:
  Subspace() = default;

  static Subspace zero(Index ambient) {
    Subspace s;
    s.basis_ = Mat<S>::Zero(ambient, 0);
    return s;
  }

  static Subspace full(Index ambient) {
    Subspace s;
    s.basis_ = Mat<S>::Identity(ambient, ambient);
    return s;
  }

  /// Orthonormalizes the column span of `vectors` (rank decided by tol).
  static Subspace span_of(const Mat<S>& vectors, const Tolerance& tol = {});

  /// Wraps an already orthonormal basis; cheap consistency check only.
  static Subspace from_orthonormal(Mat<S> basis) {
    if (basis.cols() > 0) {
      const double err =
          (basis.adjoint() * basis - Mat<S>::Identity(basis.cols(), basis.cols())).norm();
      if (err > 1e-8 * static_cast<double>(basis.cols()))
        throw std::invalid_argument("Subspace: basis not orthonormal");
    }
    Subspace s;
    s.basis_ = std::move(basis);
    return s;
  }

  Index ambient() const { return basis_.rows(); }
  Index dim() const { return basis_.cols(); }
  bool is_zero() const { return dim() == 0; }
  bool is_full() const { return dim() == ambient(); }
  const Mat<S>& basis() const { return basis_; }

  /// Orthogonal projector onto the subspace.
  Mat<S> projector() const { return basis_ * basis_.adjoint(); }

  /// Projector onto the orthogonal complement.
  Mat<S> complement_projector() const {
    return Mat<S>::Identity(ambient(), ambient()) - projector();
  }

 private:
  Mat<S> basis_;  // ambient x dim, orthonormal columns
};

using SubspaceR = Subspace<Real>;
using SubspaceC = Subspace<Complex>;

/// Orthonormal basis of the column space.
template <class S>
Subspace<S> column_space(const Mat<S>& m, const Tolerance& tol = {}) {
  require_finite(m, "column_space");
  if (m.rows() == 0 || m.cols() == 0) return Subspace<S>::zero(m.rows());
  Eigen::JacobiSVD<Mat<S>> svd(m, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double thr = tol.threshold(sv(0));
  Index r = 0;
  while (r < sv.size() && sv(r) > thr) ++r;
  return Subspace<S>::from_orthonormal(svd.matrixU().leftCols(r));
}

template <class S>
Subspace<S> Subspace<S>::span_of(const Mat<S>& vectors, const Tolerance& tol) {
  return column_space(vectors, tol);
}

/// Orthonormal basis of ker(m). A 0 x n matrix has full kernel.
template <class S>
Subspace<S> null_space(const Mat<S>& m, const Tolerance& tol = {}) {
  require_finite(m, "null_space");
  const Index n = m.cols();
  if (m.rows() == 0 || n == 0) return n == 0 ? Subspace<S>::zero(0) : Subspace<S>::full(n);
  Eigen::JacobiSVD<Mat<S>> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double thr = tol.threshold(sv(0));
  Index r = 0;
  while (r < sv.size() && sv(r) > thr) ++r;
  return Subspace<S>::from_orthonormal(svd.matrixV().rightCols(n - r));
}

template <class S>
Subspace<S> sum(const Subspace<S>& u, const Subspace<S>& w, const Tolerance& tol = {}) {
  if (u.ambient() != w.ambient())
    throw std::invalid_argument("sum: ambient dimension mismatch");
  Mat<S> cat(u.ambient(), u.dim() + w.dim());
  cat << u.basis(), w.basis();
  return column_space(cat, tol);
}

/// Intersection via the kernel of the stacked complement projectors.
template <class S>
Subspace<S> intersect(const Subspace<S>& u, const Subspace<S>& w, const Tolerance& tol = {}) {
  if (u.ambient() != w.ambient())
    throw std::invalid_argument("intersect: ambient dimension mismatch");
  const Index n = u.ambient();
  if (u.is_zero() || w.is_zero()) return Subspace<S>::zero(n);
  if (u.is_full()) return w;
  if (w.is_full()) return u;
  Mat<S> stacked(2 * n, n);
  stacked.topRows(n) = u.complement_projector();
  stacked.bottomRows(n) = w.complement_projector();
  return null_space(stacked, tol);
}

/// Image of a subspace under a matrix.
template <class S>
Subspace<S> map_subspace(const Mat<S>& t, const Subspace<S>& u, const Tolerance& tol = {}) {
  if (t.cols() != u.ambient())
    throw std::invalid_argument("map_subspace: dimension mismatch");
  return column_space(Mat<S>(t * u.basis()), tol);
}

/// preimage(T, W) = ker(P_{W_perp} T), a subspace of the source space.
template <class S>
Subspace<S> preimage(const Mat<S>& t, const Subspace<S>& w, const Tolerance& tol = {}) {
  if (t.rows() != w.ambient())
    throw std::invalid_argument("preimage: T does not map into W's ambient space");
  if (w.is_full()) return Subspace<S>::full(t.cols());
  return null_space(Mat<S>(w.complement_projector() * t), tol);
}

/// true iff rank(P_{W_perp} basis(U)) = 0.
template <class S>
bool contained_in(const Subspace<S>& u, const Subspace<S>& w, const Tolerance& tol = {}) {
  if (u.ambient() != w.ambient())
    throw std::invalid_argument("contained_in: ambient dimension mismatch");
  if (u.is_zero()) return true;
  if (w.is_full()) return true;
  if (u.dim() > w.dim()) return false;
  // P_{W_perp} u = u - B (B^H u); columns of u are unit so sigma_max <= 1.
  Mat<S> res = u.basis() - w.basis() * (w.basis().adjoint() * u.basis());
  return rank_tol(res, tol) == 0;
}

/// Subspaces considered equal when they contain each other.
template <class S>
bool same_subspace(const Subspace<S>& u, const Subspace<S>& w, const Tolerance& tol = {}) {
  return u.dim() == w.dim() && contained_in(u, w, tol) && contained_in(w, u, tol);
}

/// ||P_W u|| / ||u||; the paper's cosine between a vector and a subspace,
/// which for a subspace (closed under unit scalars) is the projection ratio.
template <class S>
double cos_vector_subspace(const Vec<S>& u, const Subspace<S>& w) {
  if (u.rows() != w.ambient())
    throw std::invalid_argument("cos_vector_subspace: dimension mismatch");
  const double nu = u.norm();
  if (!(nu > 0.0)) throw std::domain_error("cos_vector_subspace: zero vector");
  if (w.is_zero()) throw std::domain_error("cos_vector_subspace: trivial subspace");
  return std::min(1.0, (w.basis().adjoint() * u).norm() / nu);
}

/// Moore-Penrose pseudoinverse with singular values below threshold zeroed.
template <class S>
Mat<S> pinv(const Mat<S>& m, const Tolerance& tol = {}) {
  require_finite(m, "pinv");
  if (m.rows() == 0 || m.cols() == 0) return Mat<S>::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Mat<S>> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double thr = tol.threshold(sv(0));
  Vec<S> inv = Vec<S>::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thr) inv(i) = S(1.0 / sv(i));
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

/// Gaussian matrix / subspace draws. Generic objects in the paper's sense are
/// realized by absolutely continuous sampling with a recorded seed.
inline MatR random_matrix(Index rows, Index cols, Rng& rng) {
  MatR m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.gaussian();
  return m;
}

inline MatC random_matrix_c(Index rows, Index cols, Rng& rng) {
  MatC m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = Complex(rng.gaussian(), rng.gaussian());
  return m;
}

template <class S>
Mat<S> random_matrix_of(Index rows, Index cols, Rng& rng) {
  if constexpr (std::is_same_v<S, Real>)
    return random_matrix(rows, cols, rng);
  else
    return random_matrix_c(rows, cols, rng);
}

template <class S>
Subspace<S> random_subspace_of(Index ambient, Index dim, Rng& rng) {
  if (dim < 0 || dim > ambient) throw std::invalid_argument("random_subspace: bad dimension");
  if (dim == 0) return Subspace<S>::zero(ambient);
  return column_space<S>(random_matrix_of<S>(ambient, dim, rng));
}

/// Uniformly drawn subspace of `inside` with the given dimension.
template <class S>
Subspace<S> random_subspace_inside(const Subspace<S>& inside, Index dim, Rng& rng) {
  if (dim < 0 || dim > inside.dim())
    throw std::invalid_argument("random_subspace_inside: bad dimension");
  if (dim == 0) return Subspace<S>::zero(inside.ambient());
  Mat<S> coeff = random_matrix_of<S>(inside.dim(), dim, rng);
  return column_space<S>(Mat<S>(inside.basis() * coeff));
}

/// An ordered tuple of subspaces of a common ambient space, optionally with
/// index sets whose sums form a structured arrangement. Induced parts are
/// materialized on demand and cached.
template <class S>
class SubspaceArrangement {
 public:
  SubspaceArrangement() = default;
  explicit SubspaceArrangement(std::vector<Subspace<S>> parts,
                               std::optional<std::vector<std::vector<int>>> index_sets = {})
      : parts_(std::move(parts)), index_sets_(std::move(index_sets)) {
    if (parts_.empty()) throw std::invalid_argument("SubspaceArrangement: no parts");
    for (const auto& p : parts_)
      if (p.ambient() != parts_.front().ambient())
        throw std::invalid_argument("SubspaceArrangement: mixed ambient dimensions");
    if (index_sets_) {
      for (const auto& set : *index_sets_)
        for (int i : set)
          if (i < 0 || i >= static_cast<int>(parts_.size()))
            throw std::invalid_argument("SubspaceArrangement: index set out of range");
      cache_.resize(index_sets_->size());
    }
  }

  Index ambient() const { return parts_.front().ambient(); }
  std::size_t part_count() const { return index_sets_ ? index_sets_->size() : parts_.size(); }
  const std::vector<Subspace<S>>& base_parts() const { return parts_; }
  const std::optional<std::vector<std::vector<int>>>& index_sets() const { return index_sets_; }

  /// j-th part of the arrangement: V_{I_j} when index sets are present,
  /// otherwise the j-th base subspace.
  const Subspace<S>& part(std::size_t j) const {
    if (!index_sets_) return parts_.at(j);
    auto& slot = cache_.at(j);
    if (!slot) {
      Subspace<S> acc = Subspace<S>::zero(ambient());
      for (int i : (*index_sets_)[j]) acc = sum(acc, parts_[i]);
      slot = std::move(acc);
    }
    return *slot;
  }

 private:
  std::vector<Subspace<S>> parts_;
  std::optional<std::vector<std::vector<int>>> index_sets_;
  mutable std::vector<std::optional<Subspace<S>>> cache_;
};

using ArrangementR = SubspaceArrangement<Real>;

}  // namespace hsense

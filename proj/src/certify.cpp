#include "hsense/certify.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>

#include "hsense/parallel.hpp"

namespace hsense {

namespace {

double map_scale(const LinearMap& t) { return sigma_max(t.matrix()); }

/// Diagonal pair subspace D = ker[B | -B] = {(w, w)}/sqrt(2) when both parts
/// share a basis of dimension d.
SubspaceR diagonal_space(Index d, double sign2) {
  MatR b(2 * d, d);
  b.topRows(d) = MatR::Identity(d, d) / std::sqrt(2.0);
  b.bottomRows(d) = sign2 * MatR::Identity(d, d) / std::sqrt(2.0);
  return SubspaceR::from_orthonormal(b);
}

struct PairData {
  const MatR* m1;  // T1 * B_i
  const MatR* m2;  // T2 * B_j
  const SubspaceR* d_plain;
  const SubspaceR* d_sign;  // only consulted for the sign variant
  Index di, dj;
};

struct ViolationVec {
  VecR w;  // (w1; w2) coordinates, unit norm
};

double dist_outside(const VecR& w, const SubspaceR& d) {
  return (w - d.basis() * (d.basis().transpose() * w)).norm();
}

/// Null-space membership test for one pair. Returns a coordinate vector of a
/// collision outside the allowed diagonal(s) when the property fails.
std::optional<ViolationVec> collision_outside(const PairData& p, bool sign_variant,
                                              const Tolerance& tol) {
  MatR cat(p.m1->rows(), p.di + p.dj);
  cat.leftCols(p.di) = *p.m1;
  cat.rightCols(p.dj) = -*p.m2;
  const SubspaceR n = null_space(cat, tol);
  if (n.dim() == 0) return std::nullopt;

  const bool in_plain = contained_in(n, *p.d_plain, tol);
  if (!sign_variant) {
    if (in_plain) return std::nullopt;
  } else {
    if (in_plain || contained_in(n, *p.d_sign, tol)) return std::nullopt;
  }

  // Best direction outside D: top singular vector of the complement residual.
  auto top_outside = [&](const SubspaceR& d) -> VecR {
    MatR res = n.basis() - d.basis() * (d.basis().transpose() * n.basis());
    Eigen::JacobiSVD<MatR> svd(res, Eigen::ComputeThinV);
    VecR w = n.basis() * svd.matrixV().col(0);
    return w.normalized();
  };
  VecR u = top_outside(*p.d_plain);
  if (!sign_variant) return ViolationVec{u};

  VecR v = top_outside(*p.d_sign);
  VecR best = u;
  double best_margin = std::min(dist_outside(u, *p.d_plain), dist_outside(u, *p.d_sign));
  for (const VecR& cand :
       {v, VecR((u + v).normalized()), VecR((u - v).normalized()), VecR((u + 0.5 * v).normalized())}) {
    const double margin = std::min(dist_outside(cand, *p.d_plain), dist_outside(cand, *p.d_sign));
    if (margin > best_margin) {
      best_margin = margin;
      best = cand;
    }
  }
  return ViolationVec{best};
}

CollisionWitness make_witness(const ViolationVec& viol, const SubspaceR& vi, const SubspaceR& vj,
                              const LinearMap& t1, const LinearMap& t2) {
  const Index di = vi.dim();
  VecR v1 = vi.basis() * viol.w.head(di);
  VecR v2 = vj.basis() * viol.w.tail(viol.w.size() - di);
  const double scale = v1.norm() > 1e-12 ? v1.norm() : v2.norm();
  v1 /= scale;
  v2 /= scale;
  CollisionWitness w;
  w.v1 = std::move(v1);
  w.v2 = std::move(v2);
  w.tau1 = t1;
  w.tau2 = t2;
  return w;
}

void check_emission(const Certificate& cert) {
  if (cert.verdict == Verdict::Violated && !verify_witness(cert))
    throw std::logic_error("certify: produced witness failed re-verification");
}

/// Short-circuiting parallel scan over an indexed task list; the violation
/// with the smallest index wins, so results do not depend on scheduling.
template <class TestFn>
std::optional<std::pair<std::uint64_t, CollisionWitness>> scan_pairs(std::uint64_t count,
                                                                     int threads,
                                                                     const TestFn& test) {
  std::atomic<std::uint64_t> best{~std::uint64_t{0}};
  std::mutex mtx;
  std::optional<CollisionWitness> best_witness;
  parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t k) {
    if (k >= best.load(std::memory_order_relaxed)) return;
    auto w = test(static_cast<std::uint64_t>(k));
    if (!w) return;
    std::lock_guard<std::mutex> lock(mtx);
    if (k < best.load()) {
      best.store(k);
      best_witness = std::move(*w);
    }
  });
  if (!best_witness) return std::nullopt;
  return std::make_pair(best.load(), std::move(*best_witness));
}

std::uint64_t triangle_count(std::uint64_t c) { return c * (c + 1) / 2; }

/// Index <-> (i, j) with i <= j, ordered (0,0), (0,1), ..., (1,1), ...
std::pair<std::uint64_t, std::uint64_t> unrank_unordered(std::uint64_t k, std::uint64_t c) {
  std::uint64_t i = 0;
  std::uint64_t row = c;
  while (k >= row) {
    k -= row;
    --row;
    ++i;
  }
  return {i, i + k};
}

}  // namespace

bool verify_witness(const Certificate& cert) {
  if (!cert.witness) return false;
  const auto& w = *cert.witness;
  const double scale = std::max(map_scale(w.tau1), map_scale(w.tau2));
  const double thr = cert.tol_used.threshold(scale);
  const VecR y1 = w.tau1.apply(w.v1);
  const VecR y2 = w.tau2.apply(w.v2);
  if ((y1 - y2).norm() > thr * (w.v1.norm() + w.v2.norm())) return false;
  if ((w.v1 - w.v2).norm() <= 10.0 * thr * w.v1.norm()) return false;
  if (cert.sign_variant && (w.v1 + w.v2).norm() <= 10.0 * thr * w.v1.norm()) return false;
  return true;
}

Certificate hsp_pair(const SubspaceR& v, const LinearMap& t1, const LinearMap& t2,
                     bool sign_variant, const CertifyOptions& opts) {
  Certificate cert;
  cert.tol_used = opts.tol;
  cert.sign_variant = sign_variant;
  if (v.dim() == 0) {
    cert.vacuous = true;
    return cert;
  }
  if (t1.input_dim() != v.ambient() || t2.input_dim() != v.ambient())
    throw std::invalid_argument("hsp_pair: maps do not act on the subspace's ambient space");

  const MatR m1 = t1.matrix() * v.basis();
  const MatR m2 = t2.matrix() * v.basis();
  const SubspaceR d_plain = diagonal_space(v.dim(), 1.0);
  const SubspaceR d_sign = diagonal_space(v.dim(), -1.0);
  PairData p{&m1, &m2, &d_plain, &d_sign, v.dim(), v.dim()};
  cert.pairs_checked = 1;
  if (auto viol = collision_outside(p, sign_variant, opts.tol)) {
    cert.verdict = Verdict::Violated;
    cert.witness = make_witness(*viol, v, v, t1, t2);
    check_emission(cert);
  }
  return cert;
}

Certificate hsp_set(const SubspaceR& v, const MapFamily& family, bool sign_variant,
                    const CertifyOptions& opts) {
  Certificate cert;
  cert.tol_used = opts.tol;
  cert.sign_variant = sign_variant;
  if (v.dim() == 0) {
    cert.vacuous = true;
    return cert;
  }
  if (family.input_dim() != v.ambient())
    throw std::invalid_argument("hsp_set: family does not act on the subspace's ambient space");

  const std::uint64_t card = family.cardinality();

  // Exact pair reductions. Invertible structured factors can be cancelled on
  // the left without changing the null spaces under test:
  //   [P1 X | -P2 X] = P1 [X | -(P1^-1 P2) X]          (permutations, signs)
  //   [D1 S1 X | -D2 S2 X] = D1 [S1 X | -(D1 D2) S2 X]  (signed selections)
  // so pairs collapse to (first member, sigma) resp. (S_i, S_j, sign class).
  enum class Mode { Naive, Group, SignClass };
  Mode mode = Mode::Naive;
  if (!opts.force_naive) {
    if (family.kind() == FamilyKind::Permutations || family.kind() == FamilyKind::Signs)
      mode = Mode::Group;
    else if (family.kind() == FamilyKind::SignedSelections)
      mode = Mode::SignClass;
  }

  std::uint64_t tasks = 0;
  std::uint64_t sel_count = 0;
  switch (mode) {
    case Mode::Group: tasks = card; break;
    case Mode::SignClass: {
      sel_count = card >> family.r();
      tasks = triangle_count(sel_count) << family.r();
      break;
    }
    case Mode::Naive: tasks = triangle_count(card); break;
  }
  if (tasks > opts.pair_cap) throw FamilyCapExceeded(tasks, opts.pair_cap);

  // Materialize members and their restrictions to V once.
  std::vector<LinearMap> maps;
  std::vector<MatR> tb;
  const std::uint64_t member_cache = mode == Mode::Group || mode == Mode::Naive ? card : 0;
  if (member_cache > 0) {
    maps = family.enumerate(opts.pair_cap);
    tb.reserve(maps.size());
    for (const auto& t : maps) tb.push_back(t.matrix() * v.basis());
  }

  const SubspaceR d_plain = diagonal_space(v.dim(), 1.0);
  const SubspaceR d_sign = diagonal_space(v.dim(), -1.0);
  const Index d = v.dim();

  auto test_task = [&](std::uint64_t k) -> std::optional<CollisionWitness> {
    switch (mode) {
      case Mode::Group: {
        PairData p{&tb[0], &tb[k], &d_plain, &d_sign, d, d};
        if (auto viol = collision_outside(p, sign_variant, opts.tol)) {
          auto w = make_witness(*viol, v, v, maps[0], maps[k]);
          w.map_i = 0;
          w.map_j = k;
          return w;
        }
        return std::nullopt;
      }
      case Mode::SignClass: {
        const std::uint64_t signs = k & ((std::uint64_t{1} << family.r()) - 1);
        const auto [si, sj] = unrank_unordered(k >> family.r(), sel_count);
        const LinearMap t1 = family.at(si << family.r());
        const LinearMap t2 = family.at((sj << family.r()) | signs);
        const MatR m1 = t1.matrix() * v.basis();
        const MatR m2 = t2.matrix() * v.basis();
        PairData p{&m1, &m2, &d_plain, &d_sign, d, d};
        if (auto viol = collision_outside(p, sign_variant, opts.tol)) {
          auto w = make_witness(*viol, v, v, t1, t2);
          w.map_i = si << family.r();
          w.map_j = (sj << family.r()) | signs;
          return w;
        }
        return std::nullopt;
      }
      case Mode::Naive: {
        const auto [i, j] = unrank_unordered(k, card);
        PairData p{&tb[i], &tb[j], &d_plain, &d_sign, d, d};
        if (auto viol = collision_outside(p, sign_variant, opts.tol)) {
          auto w = make_witness(*viol, v, v, maps[i], maps[j]);
          w.map_i = i;
          w.map_j = j;
          return w;
        }
        return std::nullopt;
      }
    }
    return std::nullopt;
  };

  if (auto hit = scan_pairs(tasks, opts.threads, test_task)) {
    cert.verdict = Verdict::Violated;
    cert.witness = std::move(hit->second);
    cert.pairs_checked = hit->first + 1;
    check_emission(cert);
  } else {
    cert.pairs_checked = tasks;
  }
  return cert;
}

Certificate hsp_arrangement(const SubspaceArrangement<Real>& arr, const MapFamily& family,
                            bool sign_variant, const CertifyOptions& opts) {
  Certificate cert;
  cert.tol_used = opts.tol;
  cert.sign_variant = sign_variant;
  if (family.input_dim() != arr.ambient())
    throw std::invalid_argument("hsp_arrangement: family does not act on the arrangement");

  const std::size_t parts = arr.part_count();
  const auto maps = family.enumerate(opts.pair_cap);
  const std::uint64_t card = maps.size();

  // Task list over (part_i <= part_j) x map pairs; same-part blocks need only
  // unordered map pairs, distinct parts need both orders.
  struct Block {
    std::size_t pi, pj;
    std::uint64_t tasks;
    std::uint64_t offset;
  };
  std::vector<Block> blocks;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < parts; ++i)
    for (std::size_t j = i; j < parts; ++j) {
      const std::uint64_t t = (i == j) ? triangle_count(card) : card * card;
      blocks.push_back({i, j, t, total});
      total += t;
    }
  if (total > opts.pair_cap) throw FamilyCapExceeded(total, opts.pair_cap);

  // Restrictions of every map to every part, and the pairwise diagonals.
  std::vector<std::vector<MatR>> tb(parts, std::vector<MatR>(card));
  for (std::size_t pi = 0; pi < parts; ++pi)
    for (std::uint64_t k = 0; k < card; ++k) tb[pi][k] = maps[k].matrix() * arr.part(pi).basis();

  std::vector<std::vector<SubspaceR>> d_plain(parts), d_sign(parts);
  for (std::size_t i = 0; i < parts; ++i) {
    d_plain[i].resize(parts);
    d_sign[i].resize(parts);
    for (std::size_t j = i; j < parts; ++j) {
      const auto& bi = arr.part(i).basis();
      const auto& bj = arr.part(j).basis();
      MatR plus(bi.rows(), bi.cols() + bj.cols()), minus = MatR(bi.rows(), bi.cols() + bj.cols());
      plus.leftCols(bi.cols()) = bi;
      plus.rightCols(bj.cols()) = bj;
      minus.leftCols(bi.cols()) = bi;
      minus.rightCols(bj.cols()) = -bj;
      d_plain[i][j] = null_space(minus, opts.tol);
      d_sign[i][j] = null_space(plus, opts.tol);
    }
  }

  auto test_task = [&](std::uint64_t k) -> std::optional<CollisionWitness> {
    // locate the block (few dozen at desk scale)
    std::size_t b = 0;
    while (b + 1 < blocks.size() && blocks[b + 1].offset <= k) ++b;
    const Block& blk = blocks[b];
    const std::uint64_t local = k - blk.offset;
    std::uint64_t mi, mj;
    if (blk.pi == blk.pj) {
      auto [a, c] = unrank_unordered(local, card);
      mi = a;
      mj = c;
    } else {
      mi = local / card;
      mj = local % card;
    }
    PairData p{&tb[blk.pi][mi], &tb[blk.pj][mj], &d_plain[blk.pi][blk.pj],
               &d_sign[blk.pi][blk.pj], arr.part(blk.pi).dim(), arr.part(blk.pj).dim()};
    if (auto viol = collision_outside(p, sign_variant, opts.tol)) {
      auto w = make_witness(*viol, arr.part(blk.pi), arr.part(blk.pj), maps[mi], maps[mj]);
      w.map_i = mi;
      w.map_j = mj;
      w.part_pair = std::make_pair(blk.pi, blk.pj);
      return w;
    }
    return std::nullopt;
  };

  if (auto hit = scan_pairs(total, opts.threads, test_task)) {
    cert.verdict = Verdict::Violated;
    cert.witness = std::move(hit->second);
    cert.pairs_checked = hit->first + 1;
    check_emission(cert);
  } else {
    cert.pairs_checked = total;
  }
  return cert;
}

Certificate hsp_ksparse(const MatR& a, int k, const MapFamily& family, bool sign_variant,
                        const CertifyOptions& opts) {
  const int n = static_cast<int>(a.cols());
  if (k < 1 || k > n) throw std::invalid_argument("hsp_ksparse: need 1 <= k <= n");
  if (family.is_composed())
    throw std::invalid_argument("hsp_ksparse: pass the raw family; A is composed internally");

  std::vector<SubspaceR> parts;
  parts.reserve(n);
  for (int i = 0; i < n; ++i) {
    MatR e = MatR::Zero(n, 1);
    e(i, 0) = 1.0;
    parts.push_back(SubspaceR::from_orthonormal(e));
  }
  // all supports of size k in lexicographic order
  std::vector<std::vector<int>> supports;
  std::vector<int> cur(k);
  std::iota(cur.begin(), cur.end(), 0);
  for (;;) {
    supports.push_back(cur);
    int pos = k - 1;
    while (pos >= 0 && cur[pos] == n - k + pos) --pos;
    if (pos < 0) break;
    ++cur[pos];
    for (int q = pos + 1; q < k; ++q) cur[q] = cur[q - 1] + 1;
  }
  SubspaceArrangement<Real> arr(std::move(parts), std::move(supports));
  return hsp_arrangement(arr, family.composed_with(a), sign_variant, opts);
}

}  // namespace hsense

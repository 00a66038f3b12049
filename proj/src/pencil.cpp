#include "hsense/pencil.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "hsense/parallel.hpp"

namespace hsense {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

long long llgcd(long long a, long long b) {
  while (b) {
    a %= b;
    std::swap(a, b);
  }
  return a < 0 ? -a : a;
}

RootOfUnity make_root(long long num, long long den) {
  num %= den;
  if (num < 0) num += den;
  const long long g = llgcd(num == 0 ? den : num, den);
  return {num / g, den / g};
}

std::pair<MatC, MatC> extended_pair(const LinearMap& t1, const LinearMap& t2) {
  MatR m1 = t1.matrix(), m2 = t2.matrix();
  if (m1.rows() != m2.rows() || m1.cols() != m2.cols())
    throw std::invalid_argument("pencil: maps must share source and target dimensions");
  return {extend_square_c(complexify(m1)), extend_square_c(complexify(m2))};
}

bool near(Complex a, Complex b, double eps = 1e-8) { return std::abs(a - b) < eps; }

void set_unit_flags(EigCandidate& c) {
  c.is_zero = near(c.lambda, Complex(0, 0));
  c.is_one = near(c.lambda, Complex(1, 0));
  c.is_minus_one = near(c.lambda, Complex(-1, 0));
}

}  // namespace

Complex RootOfUnity::value() const {
  const double a = kTwoPi * static_cast<double>(num) / static_cast<double>(den);
  return {std::cos(a), std::sin(a)};
}

SubspaceC eig_subspace(const LinearMap& t1, const LinearMap& t2, Complex lambda,
                       const Tolerance& tol) {
  auto [m1, m2] = extended_pair(t1, t2);
  return null_space(MatC(m1 - lambda * m2), tol);
}

// ---------------------------------------------------------------------------
// Combinatorial path
// ---------------------------------------------------------------------------

namespace {

struct CycleConstraint {
  long long e;  // net exponent, normalized >= 0
  int sigma;    // +1 or -1
};

struct Component {
  std::vector<int> coords;
  std::vector<CycleConstraint> constraints;
  enum class Type { Path, Cyclic, Dead } type = Type::Path;
  std::set<RootOfUnity> lambdas;  // Cyclic only
};

// Solutions of lambda^e = sigma, e >= 1.
std::set<RootOfUnity> unit_roots(long long e, int sigma) {
  std::set<RootOfUnity> out;
  if (sigma > 0) {
    for (long long k = 0; k < e; ++k) out.insert(make_root(k, e));
  } else {
    for (long long k = 0; k < e; ++k) out.insert(make_root(2 * k + 1, 2 * e));
  }
  return out;
}

void classify_component(Component& comp) {
  bool have_set = false;
  std::set<RootOfUnity> acc;
  for (const auto& c : comp.constraints) {
    if (c.e == 0) {
      if (c.sigma < 0) {
        comp.type = Component::Type::Dead;
        return;
      }
      continue;  // lambda^0 = +1 always holds
    }
    auto roots = unit_roots(c.e, c.sigma);
    if (!have_set) {
      acc = std::move(roots);
      have_set = true;
    } else {
      std::set<RootOfUnity> inter;
      std::set_intersection(acc.begin(), acc.end(), roots.begin(), roots.end(),
                            std::inserter(inter, inter.begin()));
      acc = std::move(inter);
    }
    if (have_set && acc.empty()) {
      comp.type = Component::Type::Dead;
      return;
    }
  }
  if (!have_set) {
    comp.type = Component::Type::Path;
  } else {
    comp.type = Component::Type::Cyclic;
    comp.lambdas = std::move(acc);
  }
}

}  // namespace

PencilSpectrum spectrum_combinatorial(const LinearMap& t1, const LinearMap& t2) {
  if (!t1.is_structured() || !t2.is_structured())
    throw std::invalid_argument(
        "spectrum_combinatorial: unsupported map kind (use spectrum_numeric)");
  if (t1.source_dim() != t2.source_dim() || t1.target_dim() != t2.target_dim())
    throw std::invalid_argument("spectrum_combinatorial: maps must share dimensions");

  const int m = t1.source_dim();
  const int rows = t1.target_dim();

  struct Edge {
    int a, b, s;
  };
  std::vector<Edge> edges(rows);
  std::vector<std::vector<std::pair<int, int>>> adj(m);  // (edge index, +1 if a-side)
  for (int k = 0; k < rows; ++k) {
    auto [a, sa] = t1.row_action(k);
    auto [b, sb] = t2.row_action(k);
    edges[k] = {a, b, sa * sb};
    adj[a].push_back({k, +1});
    if (b != a) adj[b].push_back({k, -1});
  }

  std::vector<int> comp_id(m, -1);
  std::vector<long long> expo(m, 0);
  std::vector<int> coeff(m, 1);
  std::vector<char> edge_done(rows, 0);
  std::vector<Component> comps;
  int k_free = 0;

  for (int v = 0; v < m; ++v) {
    if (comp_id[v] >= 0) continue;
    if (adj[v].empty()) {
      ++k_free;
      continue;
    }
    Component comp;
    const int id = static_cast<int>(comps.size());
    std::vector<int> stack = {v};
    comp_id[v] = id;
    expo[v] = 0;
    coeff[v] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      comp.coords.push_back(u);
      for (auto [ek, side] : adj[u]) {
        const Edge& e = edges[ek];
        if (e.a == e.b) {
          // self loop: w_a = lambda s w_a, i.e. lambda^1 = s
          if (!edge_done[ek]) {
            edge_done[ek] = 1;
            comp.constraints.push_back({1, e.s});
          }
          continue;
        }
        const int w = (side > 0) ? e.b : e.a;
        if (comp_id[w] < 0) {
          edge_done[ek] = 1;
          comp_id[w] = id;
          // relation w_a = lambda s w_b assigns exponents p_a = p_b + 1
          expo[w] = (side > 0) ? expo[u] - 1 : expo[u] + 1;
          coeff[w] = e.s * coeff[u];
          stack.push_back(w);
        } else if (!edge_done[ek]) {
          edge_done[ek] = 1;
          long long net = expo[e.a] - expo[e.b] - 1;
          if (net < 0) net = -net;
          comp.constraints.push_back({net, e.s * coeff[e.a] * coeff[e.b]});
        }
      }
    }
    classify_component(comp);
    comps.push_back(std::move(comp));
  }

  int c_path = 0;
  std::map<RootOfUnity, int> hits;
  for (const auto& c : comps) {
    if (c.type == Component::Type::Path) ++c_path;
    if (c.type == Component::Type::Cyclic)
      for (const auto& root : c.lambdas) hits[root] += 1;
  }

  PencilSpectrum spec;
  spec.method = SpectrumMethod::Combinatorial;
  spec.ambient = m;
  spec.ker1_dim = m - rows;
  spec.ker2_dim = m - rows;
  spec.common_kernel_dim = k_free;
  spec.path_family_count = c_path;
  spec.generic_dim = k_free + c_path;

  auto eigdim_at = [&](const RootOfUnity& root) {
    auto it = hits.find(root);
    return spec.generic_dim + (it == hits.end() ? 0 : it->second);
  };
  spec.ker_diff_dim = eigdim_at(make_root(0, 1));
  spec.ker_sum_dim = eigdim_at(make_root(1, 2));

  for (const auto& [root, count] : hits) {
    EigCandidate c;
    c.exact = root;
    c.lambda = root.value();
    c.eigdim = spec.generic_dim + count;
    set_unit_flags(c);
    // E_1 equals ker(t1 - t2); any other active candidate carries a component
    // eigenvector that no member of Z contains.
    c.inside_Z = c.is_one;
    spec.candidates.push_back(c);
  }
  if (c_path > 0)
    spec.diagnostics.push_back("path-type (all lambda) families: " + std::to_string(c_path));
  return spec;
}

// ---------------------------------------------------------------------------
// Numeric path
// ---------------------------------------------------------------------------

namespace {

Index nulldim(const MatC& m, const Tolerance& tol) { return m.cols() - rank_tol(m, tol); }

std::vector<Complex> poly_roots(const std::vector<Complex>& coeffs) {
  // coeffs[k] multiplies lambda^k; leading coefficient nonzero
  const int dg = static_cast<int>(coeffs.size()) - 1;
  if (dg < 1) return {};
  MatC comp = MatC::Zero(dg, dg);
  for (int i = 1; i < dg; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < dg; ++i) comp(i, dg - 1) = -coeffs[i] / coeffs[dg];
  Eigen::ComplexEigenSolver<MatC> es(comp, false);
  std::vector<Complex> roots(dg);
  for (int i = 0; i < dg; ++i) roots[i] = es.eigenvalues()(i);
  return roots;
}

std::vector<Complex> cluster(const std::vector<Complex>& pts, double radius) {
  std::vector<Complex> centers;
  std::vector<int> counts;
  std::vector<Complex> sorted = pts;
  std::sort(sorted.begin(), sorted.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  for (const Complex& p : sorted) {
    bool placed = false;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      if (std::abs(centers[i] - p) < radius) {
        centers[i] = (centers[i] * static_cast<double>(counts[i]) + p) /
                     static_cast<double>(counts[i] + 1);
        counts[i] += 1;
        placed = true;
        break;
      }
    }
    if (!placed) {
      centers.push_back(p);
      counts.push_back(1);
    }
  }
  return centers;
}

}  // namespace

PencilSpectrum spectrum_numeric(const LinearMap& t1, const LinearMap& t2, const Tolerance& tol) {
  auto [T1, T2] = extended_pair(t1, t2);
  const Index n = T1.rows();

  PencilSpectrum spec;
  spec.method = SpectrumMethod::Numeric;
  spec.ambient = static_cast<int>(n);

  const SubspaceC ker1 = null_space(T1, tol);
  const SubspaceC ker2 = null_space(T2, tol);
  const SubspaceC kerdiff = null_space(MatC(T1 - T2), tol);
  spec.ker1_dim = static_cast<int>(ker1.dim());
  spec.ker2_dim = static_cast<int>(ker2.dim());
  spec.ker_diff_dim = static_cast<int>(kerdiff.dim());
  spec.ker_sum_dim = static_cast<int>(nulldim(MatC(T1 + T2), tol));
  spec.common_kernel_dim = static_cast<int>(intersect(ker1, ker2, tol).dim());

  // Generic kernel dimension from probes off the unit circle (structured
  // pencils keep all isolated eigenvalues on it).
  const Complex probes[3] = {Complex(1.203, 0.791), Complex(-0.377, 1.529),
                             Complex(0.651, -0.313)};
  Index g = n;
  for (const Complex& z : probes) g = std::min(g, nulldim(MatC(T1 - z * T2), tol));
  spec.generic_dim = static_cast<int>(g);
  spec.path_family_count = spec.generic_dim - spec.common_kernel_dim;
  if (spec.singular_pencil()) spec.diagnostics.push_back("singular pencil (det identically 0)");

  const Index rho = n - g;
  std::vector<Complex> centers;
  std::vector<Complex> failed;
  if (rho > 0) {
    // det of the randomly compressed pencil, interpolated on a circle
    Rng crng(0xC0FFEEULL);
    MatC U = MatC::Identity(rho, n), V = MatC::Identity(n, rho);
    if (rho < n) {
      U = random_matrix_c(rho, n, crng);
      V = random_matrix_c(n, rho, crng);
    }
    const Index pts = rho + 1;
    MatC vand(pts, pts);
    VecC vals(pts);
    for (Index j = 0; j < pts; ++j) {
      const double a = kTwoPi * static_cast<double>(j) / static_cast<double>(pts);
      const Complex z = 1.1 * Complex(std::cos(a), std::sin(a));
      for (Index k = 0; k < pts; ++k) vand(j, k) = std::pow(z, static_cast<double>(k));
      vals(j) = Eigen::PartialPivLU<MatC>(U * MatC(T1 - z * T2) * V).determinant();
    }
    VecC coeff = vand.partialPivLu().solve(vals);
    double cmax = 0;
    for (Index k = 0; k < pts; ++k) cmax = std::max(cmax, std::abs(coeff(k)));
    Index dg = pts - 1;
    while (dg > 0 && std::abs(coeff(dg)) <= 1e-9 * cmax) --dg;
    std::vector<Complex> cvec(dg + 1);
    for (Index k = 0; k <= dg; ++k) cvec[k] = coeff(k);
    if (cmax > 0) {
      auto roots = poly_roots(cvec);
      // fine clusters, verified by an explicit null-space computation; a
      // failed verification can only drop spurious roots
      for (const Complex& c : cluster(roots, 1e-6)) {
        if (nulldim(MatC(T1 - c * T2), tol) > g) {
          centers.push_back(c);
        } else {
          failed.push_back(c);
        }
      }
      // multiple roots split under coefficient noise; their centroid restores
      // the eigenvalue to full accuracy, so re-cluster the failures coarsely
      for (const Complex& c : cluster(failed, 2.5e-3)) {
        bool known = false;
        for (const Complex& k : centers) known = known || near(k, c, 1e-6);
        if (!known && nulldim(MatC(T1 - c * T2), tol) > g) centers.push_back(c);
      }
    }
    // exact probes at the common multiplicity sites
    for (const Complex z : {Complex(1, 0), Complex(-1, 0), Complex(0, 1), Complex(0, -1)}) {
      bool known = false;
      for (const Complex& k : centers) known = known || near(k, z);
      if (!known && nulldim(MatC(T1 - z * T2), tol) > g) centers.push_back(z);
    }
  }

  for (const Complex& c : centers) {
    EigCandidate cand;
    cand.lambda = c;
    const SubspaceC e = null_space(MatC(T1 - c * T2), tol);
    cand.eigdim = static_cast<int>(e.dim());
    set_unit_flags(cand);
    cand.inside_Z = contained_in(e, kerdiff, tol) || contained_in(e, ker1, tol) ||
                    contained_in(e, ker2, tol);
    spec.candidates.push_back(cand);
  }
  std::sort(spec.candidates.begin(), spec.candidates.end(),
            [](const EigCandidate& a, const EigCandidate& b) {
              if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
              return a.lambda.imag() < b.lambda.imag();
            });
  return spec;
}

PencilSpectrum spectrum_of(const LinearMap& t1, const LinearMap& t2, const Tolerance& tol) {
  const bool structured = t1.is_structured() && t2.is_structured() &&
                          t1.source_dim() == t2.source_dim() &&
                          t1.target_dim() == t2.target_dim();
  return structured ? spectrum_combinatorial(t1, t2) : spectrum_numeric(t1, t2, tol);
}

int dim_U(const PencilSpectrum& spec, bool sign_variant) {
  int best = -1;
  for (const auto& c : spec.candidates) {
    if (c.is_zero || c.is_one) continue;
    if (sign_variant && c.is_minus_one) continue;
    if (c.inside_Z) continue;
    best = std::max(best, c.eigdim);
  }
  // A path family sweeps a one-parameter union of eigenspaces whose closure
  // gains one dimension over the generic eigenspace.
  if (spec.path_family_count > 0) best = std::max(best, spec.generic_dim + 1);
  return best;
}

Condition1Report check_condition_1(const MapFamily& family, int d, const Condition1Options& opts) {
  if (d < 0) throw std::invalid_argument("check_condition_1: d must be >= 0");
  const auto maps = family.enumerate(opts.cap);
  const std::size_t count = maps.size();

  Condition1Report rep;
  rep.d = d;
  rep.sign_variant = opts.sign_variant;
  rep.member_count = count;
  rep.ambient = maps.front().input_dim();

  for (std::size_t i = 0; i < count; ++i) {
    const int rank = maps[i].is_composed() || maps[i].kind() == MapKind::Explicit
                         ? static_cast<int>(rank_tol(maps[i].matrix(), opts.tol))
                         : maps[i].structured_rank();
    if (rank < 2 * d) rep.rank_failures.push_back(i);
  }

  // dim_U is symmetric in the pair, so unordered pairs settle both orders
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = i; j < count; ++j) pairs.push_back({i, j});
  rep.pairs_checked = pairs.size();

  std::vector<int> dims(pairs.size(), -1);
  parallel_for(pairs.size(), opts.threads, [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    dims[k] = dim_U(spectrum_of(maps[i], maps[j], opts.tol), opts.sign_variant);
  });

  const int n = rep.ambient;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    rep.max_dimU = std::max(rep.max_dimU, dims[k]);
    if (n - dims[k] < d) {
      PairCondition pc;
      pc.i = pairs[k].first;
      pc.j = pairs[k].second;
      pc.dimU = dims[k];
      pc.codim_ok = false;
      rep.pair_failures.push_back(pc);
    }
  }
  rep.all_pass = rep.rank_failures.empty() && rep.pair_failures.empty();
  return rep;
}

}  // namespace hsense

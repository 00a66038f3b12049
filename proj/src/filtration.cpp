#include "hsense/filtration.hpp"

#include <sstream>

namespace hsense {

namespace {

std::string dim_string(const FiltrationTrace& trace) {
  std::ostringstream os;
  for (int j = 0; j < trace.depth(); ++j) {
    if (j) os << " ";
    os << "(" << trace.at(j).r.dim() << "," << trace.at(j).f.dim() << "," << trace.at(j).g.dim()
       << ")";
  }
  return os.str();
}

MatC cat_images(const MatC& t1, const MatC& t2, const SubspaceC& a, const SubspaceC& b) {
  MatC out(t1.rows(), a.dim() + b.dim());
  out.leftCols(a.dim()) = t1 * a.basis();
  out.rightCols(b.dim()) = t2 * b.basis();
  return out;
}

Index doubling_rank(const MatC& t1, const MatC& t2, const SubspaceC& w, const Tolerance& tol) {
  return rank_tol(cat_images(t1, t2, w, w), tol);
}

/// Uniform draw inside `inside` that misses every listed subspace; candidates
/// failing any transversality are rejected and redrawn. The avoided loci have
/// measure zero, so exhaustion signals a tolerance problem, not bad luck.
SubspaceC draw_avoiding(const SubspaceC& inside, Index dim,
                        const std::vector<const SubspaceC*>& avoid, Rng& rng,
                        const Tolerance& tol, int max_retries, const char* who, int level) {
  if (dim < 0 || dim > inside.dim())
    throw ConstructionError(std::string(who) + ": requested dimension out of range", level);
  if (dim == 0) return SubspaceC::zero(inside.ambient());
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    SubspaceC w = random_subspace_inside(inside, dim, rng);
    if (w.dim() != dim) continue;
    bool ok = true;
    for (const SubspaceC* a : avoid) {
      if (a->dim() == 0) continue;
      if (intersect(w, *a, tol).dim() > 0) {
        ok = false;
        break;
      }
    }
    if (ok) return w;
  }
  std::ostringstream os;
  os << who << ": transversality failed after retries (avoiding";
  for (const SubspaceC* a : avoid) os << " dim=" << a->dim();
  os << " inside dim=" << inside.dim() << ", want dim=" << dim << ")";
  throw ConstructionError(os.str(), level);
}

}  // namespace

FiltrationTrace run_filtration(const MatC& t1, const MatC& t2, int max_levels,
                               const Tolerance& tol) {
  if (t1.rows() != t1.cols() || t2.rows() != t2.cols() || t1.rows() != t2.rows())
    throw std::invalid_argument("run_filtration: maps must be square-extended to equal size");
  const Index n = t1.rows();
  // dim R + dim F drops by at least one per level until stabilization, so
  // 2n + 2 recursion steps always suffice (the F chain can lag the R chain
  // by a level, as the identity/nilpotent pair shows).
  if (max_levels < 0) max_levels = 2 * static_cast<int>(n) + 2;

  FiltrationTrace trace;
  trace.ambient = n;
  FiltrationLevel level0;
  level0.r = SubspaceC::full(n);
  level0.f = SubspaceC::full(n);
  level0.g = SubspaceC::full(n);  // convention for level 0
  level0.c = SubspaceC::full(n);
  trace.levels.push_back(level0);

  for (int j = 0;; ++j) {
    FiltrationLevel& cur = trace.levels[j];
    cur.c = intersect(cur.r, cur.f, tol);
    const SubspaceC img1 = column_space(MatC(t1 * cur.c.basis()), tol);
    const SubspaceC img2 = column_space(MatC(t2 * cur.c.basis()), tol);
    FiltrationLevel next;
    next.g = intersect(img1, img2, tol);
    next.r = intersect(preimage(t1, next.g, tol), cur.c, tol);
    next.f = intersect(preimage(t2, next.g, tol), cur.c, tol);
    next.c = next.r;  // refined below when the loop continues
    const bool stable = next.r.dim() == cur.r.dim() && next.f.dim() == cur.f.dim() &&
                        contained_in(next.r, cur.r, tol) && contained_in(next.f, cur.f, tol) &&
                        contained_in(cur.r, next.r, tol) && contained_in(cur.f, next.f, tol);
    trace.levels.push_back(std::move(next));
    if (stable) {
      trace.levels.back().c = intersect(trace.levels.back().r, trace.levels.back().f, tol);
      break;
    }
    if (j + 1 >= max_levels)
      throw FiltrationError("run_filtration: no stabilization within max_levels (dims " +
                                dim_string(trace) + ")",
                            trace);
  }

  // alpha: first level with R = F, dims already at their limit, and
  // tau1(R) = tau2(R) = G.
  const int stop = trace.depth() - 1;
  trace.alpha = stop;
  for (int a = 0; a <= stop; ++a) {
    const auto& lv = trace.at(a);
    if (lv.r.dim() != trace.at(stop).r.dim() || lv.f.dim() != trace.at(stop).f.dim()) continue;
    if (!same_subspace(lv.r, lv.f, tol)) continue;
    const SubspaceC i1 = column_space(MatC(t1 * lv.r.basis()), tol);
    const SubspaceC i2 = column_space(MatC(t2 * lv.r.basis()), tol);
    if (same_subspace(i1, lv.g, tol) && same_subspace(i2, lv.g, tol)) {
      trace.alpha = a;
      break;
    }
  }
  return trace;
}

FiltrationTrace run_filtration(const LinearMap& t1, const LinearMap& t2, int max_levels,
                               const Tolerance& tol) {
  MatR m1 = t1.matrix(), m2 = t2.matrix();
  if (m1.rows() != m2.rows() || m1.cols() != m2.cols())
    throw std::invalid_argument("run_filtration: maps must share dimensions");
  return run_filtration(extend_square_c(complexify(m1)), extend_square_c(complexify(m2)),
                        max_levels, tol);
}

std::optional<std::string> trace_invariant_violation(const FiltrationTrace& trace, const MatC& t1,
                                                     const MatC& t2, const Tolerance& tol) {
  for (int j = 0; j + 1 < trace.depth(); ++j) {
    const auto& cur = trace.at(j);
    const auto& nxt = trace.at(j + 1);
    if (!contained_in(nxt.r, cur.c, tol)) return "R_{j+1} not inside R_j cap F_j at j=" + std::to_string(j);
    if (!contained_in(cur.c, cur.r, tol)) return "R_j cap F_j not inside R_j at j=" + std::to_string(j);
    if (!contained_in(nxt.f, cur.c, tol)) return "F_{j+1} not inside R_j cap F_j at j=" + std::to_string(j);
    if (!contained_in(cur.c, cur.f, tol)) return "R_j cap F_j not inside F_j at j=" + std::to_string(j);
    if (j + 2 < trace.depth() && !contained_in(trace.at(j + 2).g, nxt.g, tol))
      return "G_{j+2} not inside G_{j+1} at j=" + std::to_string(j);
  }
  if (trace.alpha > trace.ambient) return "alpha exceeds the ambient dimension";
  const auto& lv = trace.at(trace.alpha);
  if (!same_subspace(lv.r, lv.f, tol)) return "R_alpha != F_alpha";
  const SubspaceC i1 = column_space(MatC(t1 * lv.r.basis()), tol);
  const SubspaceC i2 = column_space(MatC(t2 * lv.r.basis()), tol);
  if (!same_subspace(i1, lv.g, tol)) return "tau1(R_alpha) != G_alpha";
  if (!same_subspace(i2, lv.g, tol)) return "tau2(R_alpha) != G_alpha";
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Initializations
// ---------------------------------------------------------------------------

WitnessSubspace init_W_alpha(const FiltrationTrace& trace, const MatC& t1, const MatC& t2, int d,
                             const Tolerance& tol, Rng& rng, int max_retries) {
  const Index n = trace.ambient;
  const int alpha = trace.alpha;
  const SubspaceC& r_alpha = trace.at(alpha).r;
  const SubspaceC& g_alpha = trace.at(alpha).g;
  if (r_alpha.dim() <= n - d)
    throw NotApplicableError("init_W_alpha: dim(R_alpha) <= n - d");

  const Index k = r_alpha.dim() - (n - d);
  const Index h_dim = g_alpha.dim();
  if (h_dim < 2 * k)
    throw ConstructionError("init_W_alpha: dim(G_alpha) < 2(dim R_alpha - (n-d))", alpha);

  const SubspaceC ker1 = null_space(t1, tol);
  const SubspaceC ker2 = null_space(t2, tol);
  const SubspaceC ker1r = intersect(ker1, r_alpha, tol);
  const SubspaceC ker2r = intersect(ker2, r_alpha, tol);

  std::string fail = "init_W_alpha: retries exhausted";
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    // H inside R_alpha of dim G_alpha, transverse to both restricted kernels;
    // then tau1|_H, tau2|_H are isomorphisms onto G_alpha.
    SubspaceC h;
    try {
      h = draw_avoiding(r_alpha, h_dim, {&ker1r, &ker2r}, rng, tol, max_retries, "init_W_alpha/H",
                        alpha);
    } catch (const ConstructionError&) {
      continue;
    }
    const MatC m1 = t1 * h.basis();
    const MatC m2 = t2 * h.basis();
    if (rank_tol(m1, tol) != h_dim) {
      fail = "init_W_alpha: tau1 not injective on H";
      continue;
    }
    const MatC tau_h = pinv(m1, tol) * m2;  // (tau1|_H)^{-1} tau2|_H in H coordinates
    if ((m1 * tau_h - m2).norm() > tol.threshold(sigma_max(m2)) * std::max<double>(1, h_dim)) {
      fail = "init_W_alpha: tau2(H) escapes tau1(H)";
      continue;
    }

    // eigenspaces of tau_H must leave room for the doubling construction
    bool eig_ok = true;
    Eigen::ComplexEigenSolver<MatC> es(tau_h, false);
    for (Index i = 0; i < h_dim && eig_ok; ++i) {
      const Complex lam = es.eigenvalues()(i);
      const Index eigdim = h_dim - rank_tol(MatC(tau_h - lam * MatC::Identity(h_dim, h_dim)), tol);
      if (eigdim > h_dim - k) eig_ok = false;
    }
    if (!eig_ok) {
      fail = "init_W_alpha: an eigenspace of tau_H is too large";
      continue;
    }

    for (int inner = 0; inner < max_retries; ++inner) {
      const SubspaceC wc = random_subspace_of<Complex>(h_dim, k, rng);
      MatC pair(h_dim, 2 * k);
      pair.leftCols(k) = wc.basis();
      pair.rightCols(k) = tau_h * wc.basis();
      if (rank_tol(pair, tol) != 2 * k) continue;
      const SubspaceC w = column_space(MatC(h.basis() * wc.basis()), tol);
      if (w.dim() != k || doubling_rank(t1, t2, w, tol) != 2 * k) continue;
      WitnessSubspace out;
      out.v_star = w;
      out.level = alpha;
      out.slot = WitnessSlot::AtR;
      out.d = d;
      out.construction_log.push_back("init W_alpha at level " + std::to_string(alpha) + " dim " +
                                     std::to_string(k));
      out.certified = true;
      return out;
    }
    fail = "init_W_alpha: doubling draw failed";
  }
  throw ConstructionError(fail, alpha);
}

namespace {

WitnessSubspace init_sandwich(const FiltrationTrace& trace, const MatC& t1, const MatC& t2, int d,
                              const Tolerance& tol, Rng& rng, int max_retries, bool beta_kind) {
  const Index n = trace.ambient;
  const SubspaceC ker1 = null_space(t1, tol);
  const SubspaceC ker2 = null_space(t2, tol);

  for (int j = 0; j <= trace.alpha; ++j) {
    const auto& lv = trace.at(j);
    if (beta_kind) {
      // dim(R_b cap F_b) <= n-d < dim(R_b)
      if (!(lv.c.dim() <= n - d && n - d < lv.r.dim())) continue;
      const Index k = lv.r.dim() - (n - d);
      for (int attempt = 0; attempt < max_retries; ++attempt) {
        SubspaceC w = draw_avoiding(lv.r, k, {&ker1, &ker2, &lv.c}, rng, tol, max_retries,
                                    "init_W_beta", j);
        if (doubling_rank(t1, t2, w, tol) != 2 * k) continue;
        WitnessSubspace out;
        out.v_star = std::move(w);
        out.level = j;
        out.slot = WitnessSlot::AtR;
        out.d = d;
        out.construction_log.push_back("init W_beta at level " + std::to_string(j) + " dim " +
                                       std::to_string(k));
        out.certified = true;
        return out;
      }
      throw ConstructionError("init_W_beta: doubling verification failed after retries", j);
    } else {
      // dim(R_{g+1}) <= n-d < dim(R_g cap F_g)
      if (j + 1 >= trace.depth()) continue;
      const auto& nxt = trace.at(j + 1);
      if (!(nxt.r.dim() <= n - d && n - d < lv.c.dim())) continue;
      const Index k = lv.c.dim() - (n - d);
      for (int attempt = 0; attempt < max_retries; ++attempt) {
        SubspaceC z = draw_avoiding(lv.c, k, {&ker1, &ker2, &nxt.r}, rng, tol, max_retries,
                                    "init_Z_gamma", j);
        if (doubling_rank(t1, t2, z, tol) != 2 * k) continue;
        WitnessSubspace out;
        out.v_star = std::move(z);
        out.level = j;
        out.slot = WitnessSlot::AtRF;
        out.d = d;
        out.construction_log.push_back("init Z_gamma at level " + std::to_string(j) + " dim " +
                                       std::to_string(k));
        out.certified = true;
        return out;
      }
      throw ConstructionError("init_Z_gamma: doubling verification failed after retries", j);
    }
  }
  throw NotApplicableError(beta_kind ? "init_W_beta: no level has the dimension sandwich"
                                     : "init_Z_gamma: no level has the dimension sandwich");
}

}  // namespace

WitnessSubspace init_W_beta(const FiltrationTrace& trace, const MatC& t1, const MatC& t2, int d,
                            const Tolerance& tol, Rng& rng, int max_retries) {
  return init_sandwich(trace, t1, t2, d, tol, rng, max_retries, true);
}

WitnessSubspace init_Z_gamma(const FiltrationTrace& trace, const MatC& t1, const MatC& t2, int d,
                             const Tolerance& tol, Rng& rng, int max_retries) {
  return init_sandwich(trace, t1, t2, d, tol, rng, max_retries, false);
}

// ---------------------------------------------------------------------------
// Chain extension
// ---------------------------------------------------------------------------

WitnessSubspace extend_chain(WitnessSubspace witness, const FiltrationTrace& trace, const MatC& t1,
                             const MatC& t2, int d, const Tolerance& tol, Rng& rng,
                             int max_retries) {
  const Index n = trace.ambient;
  const SubspaceC ker1 = null_space(t1, tol);
  const SubspaceC ker2 = null_space(t2, tol);

  while (!(witness.level == 0 && witness.slot == WitnessSlot::AtR)) {
    if (witness.slot == WitnessSlot::AtRF) {
      // Z_j -> W_j inside R_j (same level)
      const int j = witness.level;
      const auto& lv = trace.at(j);
      const Index target = lv.r.dim() - (n - d);
      if (lv.c.dim() == lv.r.dim()) {
        witness.slot = WitnessSlot::AtR;
        witness.construction_log.push_back("extend W at level " + std::to_string(j) +
                                           " (R = R cap F)");
        continue;
      }
      const SubspaceC x = column_space(cat_images(t1, t2, witness.v_star, witness.v_star), tol);
      const SubspaceC pre1 = preimage(t1, x, tol);
      bool done = false;
      for (int attempt = 0; attempt < max_retries && !done; ++attempt) {
        SubspaceC wp = draw_avoiding(lv.r, lv.r.dim() - lv.c.dim(), {&lv.c, &pre1, &ker1, &ker2},
                                     rng, tol, max_retries, "extend_W", j);
        SubspaceC w = sum(witness.v_star, wp, tol);
        if (w.dim() != target) continue;
        if (!contained_in(witness.v_star, w, tol)) continue;
        if (doubling_rank(t1, t2, w, tol) != 2 * target) continue;
        witness.v_star = std::move(w);
        witness.slot = WitnessSlot::AtR;
        witness.construction_log.push_back("extend W at level " + std::to_string(j) + " dim " +
                                           std::to_string(target));
        done = true;
      }
      if (!done) throw ConstructionError("extend_chain: W-extension failed", j);
    } else {
      // W_{j+1} -> Z_j inside R_j cap F_j
      const int j = witness.level - 1;
      const auto& lv = trace.at(j);
      const auto& below = trace.at(j + 1);
      const Index target = lv.c.dim() - (n - d);
      if (below.r.dim() == lv.c.dim()) {
        witness.level = j;
        witness.slot = WitnessSlot::AtRF;
        witness.construction_log.push_back("extend Z at level " + std::to_string(j) +
                                           " (R_{j+1} = R_j cap F_j)");
        continue;
      }
      // the avoided preimages mirror the W-extension; the proof of this
      // device is reconstructed, so both preimages are avoided and the rank
      // condition is verified exactly afterwards
      const SubspaceC x = column_space(cat_images(t1, t2, witness.v_star, witness.v_star), tol);
      const SubspaceC pre1 = preimage(t1, x, tol);
      const SubspaceC pre2 = preimage(t2, x, tol);
      bool done = false;
      for (int attempt = 0; attempt < max_retries && !done; ++attempt) {
        SubspaceC zp =
            draw_avoiding(lv.c, lv.c.dim() - below.r.dim(), {&below.r, &pre1, &pre2, &ker1, &ker2},
                          rng, tol, max_retries, "extend_Z", j);
        SubspaceC z = sum(witness.v_star, zp, tol);
        if (z.dim() != target) continue;
        if (!contained_in(witness.v_star, z, tol)) continue;
        if (doubling_rank(t1, t2, z, tol) != 2 * target) continue;
        witness.v_star = std::move(z);
        witness.level = j;
        witness.slot = WitnessSlot::AtRF;
        witness.construction_log.push_back("extend Z at level " + std::to_string(j) + " dim " +
                                           std::to_string(target));
        done = true;
      }
      if (!done) throw ConstructionError("extend_chain: Z-extension failed", j);
    }
  }
  if (witness.v_star.dim() != d)
    throw ConstructionError("extend_chain: final dimension mismatch", 0);
  if (doubling_rank(t1, t2, witness.v_star, tol) != 2 * d)
    throw ConstructionError("extend_chain: final rank certificate failed", 0);
  witness.certified = true;
  return witness;
}

// ---------------------------------------------------------------------------
// Dispatcher
// ---------------------------------------------------------------------------

WitnessContext witness_context(const LinearMap& t1, const LinearMap& t2, int d,
                               const WitnessOptions& opts) {
  if (d < 1) throw std::invalid_argument("witness_context: d must be >= 1");
  MatR m1 = t1.matrix(), m2 = t2.matrix();
  if (m1.rows() != m2.rows() || m1.cols() != m2.cols())
    throw std::invalid_argument("witness_context: maps must share dimensions");

  WitnessContext ctx;
  ctx.t1_real = extend_square(m1);
  ctx.t2_real = extend_square(m2);
  ctx.t1 = complexify(ctx.t1_real);
  ctx.t2 = complexify(ctx.t2_real);
  ctx.ambient = ctx.t1.rows();
  ctx.d = d;
  ctx.rank1 = static_cast<int>(rank_tol(ctx.t1, opts.tol));
  ctx.rank2 = static_cast<int>(rank_tol(ctx.t2, opts.tol));
  if (ctx.rank1 < 2 * d)
    throw PreconditionError("rank(tau1) = " + std::to_string(ctx.rank1) + " < 2d = " +
                            std::to_string(2 * d));
  if (ctx.rank2 < 2 * d)
    throw PreconditionError("rank(tau2) = " + std::to_string(ctx.rank2) + " < 2d = " +
                            std::to_string(2 * d));

  const PencilSpectrum spec = spectrum_of(t1, t2, opts.tol);
  ctx.dim_u = dim_U(spec, false);
  const Index n = ctx.ambient;
  if (ctx.dim_u > n - d)
    throw PreconditionError("dim U = " + std::to_string(ctx.dim_u) + " > n - d = " +
                            std::to_string(n - d));
  ctx.dim_e1 = static_cast<int>(null_space(MatC(ctx.t1 - ctx.t2), opts.tol).dim());
  ctx.flag_case = ctx.dim_e1 > n - d;
  ctx.d0 = ctx.flag_case ? static_cast<int>(n) - ctx.dim_e1 : d;
  ctx.trace = run_filtration(ctx.t1, ctx.t2, opts.max_levels, opts.tol);
  return ctx;
}

namespace {

/// Single-subspace pipeline at dimension dd (Table-2 dispatch + descent).
WitnessSubspace single_pipeline(const WitnessContext& ctx, int dd, const Tolerance& tol, Rng& rng,
                                int max_retries) {
  const Index n = ctx.ambient;
  WitnessSubspace w;
  if (ctx.trace.at(ctx.trace.alpha).r.dim() > n - dd) {
    w = init_W_alpha(ctx.trace, ctx.t1, ctx.t2, dd, tol, rng, max_retries);
  } else {
    // the interleaved dims cross n - dd exactly once; the crossing side
    // selects the sandwich device
    bool beta = false, found = false;
    for (int j = 0; j <= ctx.trace.alpha && !found; ++j) {
      const auto& lv = ctx.trace.at(j);
      if (lv.c.dim() <= n - dd && n - dd < lv.r.dim()) {
        beta = true;
        found = true;
      } else if (j + 1 < ctx.trace.depth() && ctx.trace.at(j + 1).r.dim() <= n - dd &&
                 n - dd < lv.c.dim()) {
        beta = false;
        found = true;
      }
    }
    if (!found)
      throw ConstructionError("single_pipeline: no initialization applies (dims " +
                                  dim_string(ctx.trace) + ")",
                              ctx.trace.alpha);
    w = beta ? init_W_beta(ctx.trace, ctx.t1, ctx.t2, dd, tol, rng, max_retries)
             : init_Z_gamma(ctx.trace, ctx.t1, ctx.t2, dd, tol, rng, max_retries);
  }
  return extend_chain(std::move(w), ctx.trace, ctx.t1, ctx.t2, dd, tol, rng, max_retries);
}

}  // namespace

WitnessSubspace witness_flag(const WitnessContext& ctx, Rng& rng, const WitnessOptions& opts) {
  const Index n = ctx.ambient;
  const int d = ctx.d, d0 = ctx.d0;
  if (!ctx.flag_case) throw NotApplicableError("witness_flag: dim E_1 <= n - d");

  WitnessSubspace out;
  out.flag_case = true;
  out.d = d;
  out.d0 = d0;
  SubspaceC v0 = SubspaceC::zero(n);
  if (d0 > 0) {
    WitnessSubspace inner = single_pipeline(ctx, d0, opts.tol, rng, opts.max_retries);
    v0 = inner.v_star;
    out.construction_log = std::move(inner.construction_log);
  }
  out.construction_log.push_back("flag case d0 = " + std::to_string(d0));

  const SubspaceC ker2 = null_space(ctx.t2, opts.tol);
  const SubspaceC x = column_space(cat_images(ctx.t1, ctx.t2, v0, v0), opts.tol);
  const SubspaceC pre2 = preimage(ctx.t2, x, opts.tol);
  const SubspaceC full = SubspaceC::full(n);
  for (int attempt = 0; attempt < opts.max_retries; ++attempt) {
    SubspaceC w = draw_avoiding(full, d - d0, {&pre2, &v0, &ker2}, rng, opts.tol,
                                opts.max_retries, "witness_flag/W", 0);
    SubspaceC v = sum(v0, w, opts.tol);
    if (v.dim() != d) continue;
    MatC flag(n, v0.dim() + v.dim());
    flag.leftCols(v0.dim()) = ctx.t1 * v0.basis();
    flag.rightCols(v.dim()) = ctx.t2 * v.basis();
    if (rank_tol(flag, opts.tol) != d0 + d) continue;
    out.v_star = std::move(v);
    out.v0_star = std::move(v0);
    out.certified = true;
    out.construction_log.push_back("flag rank certificate d0 + d = " + std::to_string(d0 + d));
    return out;
  }
  throw ConstructionError("witness_flag: rank certificate failed after retries", 0);
}

WitnessSubspace construct_witness(const WitnessContext& ctx, std::uint64_t seed,
                                  const WitnessOptions& opts) {
  Rng rng(seed);
  WitnessSubspace w;
  if (ctx.flag_case) {
    w = witness_flag(ctx, rng, opts);
  } else {
    w = single_pipeline(ctx, ctx.d, opts.tol, rng, opts.max_retries);
  }

  // A certified complex witness makes the defining minors nonzero
  // polynomials, so a Gaussian real draw certifies almost surely; re-drawing
  // over the reals keeps real pairs' output real.
  if (ctx.real_maps) {
    const Index n = ctx.ambient;
    bool ok = false;
    for (int attempt = 0; attempt < opts.max_retries && !ok; ++attempt) {
      if (!w.flag_case) {
        SubspaceR v = random_subspace_of<Real>(n, ctx.d, rng);
        MatR pair(n, 2 * ctx.d);
        pair.leftCols(ctx.d) = ctx.t1_real * v.basis();
        pair.rightCols(ctx.d) = ctx.t2_real * v.basis();
        if (rank_tol(pair, opts.tol) != 2 * ctx.d) continue;
        w.v_star_real = std::move(v);
        ok = true;
      } else {
        SubspaceR v0 = random_subspace_of<Real>(n, ctx.d0, rng);
        if (ctx.d0 > 0) {
          MatR pair0(n, 2 * ctx.d0);
          pair0.leftCols(ctx.d0) = ctx.t1_real * v0.basis();
          pair0.rightCols(ctx.d0) = ctx.t2_real * v0.basis();
          if (rank_tol(pair0, opts.tol) != 2 * ctx.d0) continue;
        }
        SubspaceR wr = random_subspace_of<Real>(n, ctx.d - ctx.d0, rng);
        SubspaceR v = sum(v0, wr, opts.tol);
        if (v.dim() != ctx.d) continue;
        MatR flag(n, v0.dim() + v.dim());
        flag.leftCols(v0.dim()) = ctx.t1_real * v0.basis();
        flag.rightCols(v.dim()) = ctx.t2_real * v.basis();
        if (rank_tol(flag, opts.tol) != ctx.d0 + ctx.d) continue;
        w.v0_star_real = std::move(v0);
        w.v_star_real = std::move(v);
        ok = true;
      }
    }
    if (!ok)
      throw ConstructionError("construct_witness: real re-draw failed after retries", 0);
    w.construction_log.push_back("real re-draw certified");
  }
  return w;
}

WitnessSubspace construct_witness(const LinearMap& t1, const LinearMap& t2, int d,
                                  std::uint64_t seed, const WitnessOptions& opts) {
  return construct_witness(witness_context(t1, t2, d, opts), seed, opts);
}

bool witness_rank_recheck(const WitnessContext& ctx, const WitnessSubspace& w) {
  if (!w.certified) return false;
  const Tolerance tol{};
  if (!w.flag_case) {
    MatC pair(ctx.ambient, 2 * w.v_star.dim());
    pair.leftCols(w.v_star.dim()) = ctx.t1 * w.v_star.basis();
    pair.rightCols(w.v_star.dim()) = ctx.t2 * w.v_star.basis();
    if (rank_qr(pair, tol) != 2 * w.v_star.dim()) return false;
    if (ctx.real_maps) {
      MatR rp(ctx.ambient, 2 * w.v_star_real.dim());
      rp.leftCols(w.v_star_real.dim()) = ctx.t1_real * w.v_star_real.basis();
      rp.rightCols(w.v_star_real.dim()) = ctx.t2_real * w.v_star_real.basis();
      if (rank_qr(rp, tol) != 2 * w.v_star_real.dim()) return false;
    }
    return true;
  }
  if (!w.v0_star) return false;
  MatC flag(ctx.ambient, w.v0_star->dim() + w.v_star.dim());
  flag.leftCols(w.v0_star->dim()) = ctx.t1 * w.v0_star->basis();
  flag.rightCols(w.v_star.dim()) = ctx.t2 * w.v_star.basis();
  if (rank_qr(flag, tol) != w.v0_star->dim() + w.v_star.dim()) return false;
  if (ctx.real_maps) {
    MatR rf(ctx.ambient, w.v0_star_real->dim() + w.v_star_real.dim());
    rf.leftCols(w.v0_star_real->dim()) = ctx.t1_real * w.v0_star_real->basis();
    rf.rightCols(w.v_star_real.dim()) = ctx.t2_real * w.v_star_real.basis();
    if (rank_qr(rf, tol) != w.v0_star_real->dim() + w.v_star_real.dim()) return false;
  }
  return true;
}

}  // namespace hsense

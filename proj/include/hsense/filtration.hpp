#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hsense/maps.hpp"
#include "hsense/numkit.hpp"
#include "hsense/pencil.hpp"

namespace hsense {

/// One level of the subspace recursion. C caches R ∩ F (the recursion
/// evaluates it anyway); G at level 0 is the full space by convention.
struct FiltrationLevel {
  SubspaceC r, f, g, c;
};

struct FiltrationTrace {
  std::vector<FiltrationLevel> levels;
  int alpha = 0;
  Index ambient = 0;

  const FiltrationLevel& at(int j) const { return levels.at(j); }
  int depth() const { return static_cast<int>(levels.size()); }
};

struct FiltrationError : std::runtime_error {
  FiltrationError(const std::string& msg, FiltrationTrace t)
      : std::runtime_error(msg), trace(std::move(t)) {}
  FiltrationTrace trace;
};

struct PreconditionError : std::runtime_error {
  explicit PreconditionError(const std::string& reason) : std::runtime_error(reason) {}
};

struct NotApplicableError : std::runtime_error {
  explicit NotApplicableError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConstructionError : std::runtime_error {
  ConstructionError(const std::string& msg, int lvl) : std::runtime_error(msg), level(lvl) {}
  int level = 0;
};

/// Runs the R/F/G recursion from the full space until both chains stabilize.
/// alpha is the first level carrying the stabilization equalities R = F and
/// tau1(R) = tau2(R) = G. max_levels < 0 means ambient + 1.
FiltrationTrace run_filtration(const MatC& t1, const MatC& t2, int max_levels = -1,
                               const Tolerance& tol = {});
FiltrationTrace run_filtration(const LinearMap& t1, const LinearMap& t2, int max_levels = -1,
                               const Tolerance& tol = {});

/// Checks the chain containments, the stabilization equalities and
/// alpha <= ambient; returns a description of the first violation, if any.
std::optional<std::string> trace_invariant_violation(const FiltrationTrace& trace, const MatC& t1,
                                                     const MatC& t2, const Tolerance& tol = {});

enum class WitnessSlot { AtR, AtRF };

/// A subspace with an exact rank certificate. During the descent it lives at
/// a level of the chain (W_j in R_j or Z_j in R_j ∩ F_j); the finished
/// product sits at level 0 with dim d. For real map pairs the complex
/// pipeline output is re-drawn over the reals and re-verified.
struct WitnessSubspace {
  SubspaceC v_star;
  std::optional<SubspaceC> v0_star;
  SubspaceR v_star_real;
  std::optional<SubspaceR> v0_star_real;
  std::vector<std::string> construction_log;
  bool certified = false;
  bool flag_case = false;
  int level = 0;
  WitnessSlot slot = WitnessSlot::AtR;
  int d = 0;
  int d0 = 0;
};

struct WitnessOptions {
  Tolerance tol{};
  int max_retries = 16;
  int max_levels = -1;
};

/// Lemma-level building blocks. Each draws randomized subspaces avoiding the
/// prescribed kernels/chain members and verifies the doubling rank condition
/// dim(tau1(W) + tau2(W)) = 2 dim(W) exactly, retrying within the budget.
WitnessSubspace init_W_alpha(const FiltrationTrace& trace, const MatC& t1, const MatC& t2, int d,
                             const Tolerance& tol, Rng& rng, int max_retries = 16);
WitnessSubspace init_W_beta(const FiltrationTrace& trace, const MatC& t1, const MatC& t2, int d,
                            const Tolerance& tol, Rng& rng, int max_retries = 16);
WitnessSubspace init_Z_gamma(const FiltrationTrace& trace, const MatC& t1, const MatC& t2, int d,
                             const Tolerance& tol, Rng& rng, int max_retries = 16);

/// Alternates the two extension devices down the chain to level 0; the output
/// contains the input subspace and carries the rank certificate at dim d.
WitnessSubspace extend_chain(WitnessSubspace witness, const FiltrationTrace& trace, const MatC& t1,
                             const MatC& t2, int d, const Tolerance& tol, Rng& rng,
                             int max_retries = 16);

/// Pair-level data reusable across seeds: the extended matrices, the pencil
/// summary, and the filtration trace (all deterministic).
struct WitnessContext {
  MatC t1, t2;
  MatR t1_real, t2_real;
  Index ambient = 0;
  int d = 0;
  int rank1 = 0, rank2 = 0;
  int dim_u = -1;
  int dim_e1 = 0;
  int d0 = 0;
  bool flag_case = false;
  bool real_maps = true;
  FiltrationTrace trace;
};

/// Validates the Theorem-level preconditions (ranks >= 2d, dim U <= n - d),
/// computes dim E_1 and dispatches single vs flag case; throws
/// PreconditionError with the failed condition named.
WitnessContext witness_context(const LinearMap& t1, const LinearMap& t2, int d,
                               const WitnessOptions& opts = {});

/// The flag construction for dim E_1 > n - d: a certified pair V0 ⊂ V with
/// rank[T1 B0 | T2 B] = d0 + d.
WitnessSubspace witness_flag(const WitnessContext& ctx, Rng& rng, const WitnessOptions& opts);

/// Full pipeline: filtration -> initialization -> chain extension (or the
/// flag construction), then a real re-draw for real map pairs. The result is
/// always certified (every verdict is an exact rank check) or an exception.
WitnessSubspace construct_witness(const WitnessContext& ctx, std::uint64_t seed,
                                  const WitnessOptions& opts = {});
WitnessSubspace construct_witness(const LinearMap& t1, const LinearMap& t2, int d,
                                  std::uint64_t seed, const WitnessOptions& opts = {});

/// Independent certificate recheck: recomputes the defining rank equation of
/// the witness through the pivoted-QR rank instead of the SVD route.
bool witness_rank_recheck(const WitnessContext& ctx, const WitnessSubspace& w);

}  // namespace hsense

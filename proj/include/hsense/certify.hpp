#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hsense/maps.hpp"
#include "hsense/numkit.hpp"

namespace hsense {

enum class Verdict { Holds, Violated };

/// A collision pair: tau1(v1) = tau2(v2) with v1 != v2 (or v1 != +-v2 for the
/// sign variant). v1 is normalized to unit length for reporting.
struct CollisionWitness {
  VecR v1, v2;
  LinearMap tau1, tau2;
  std::size_t map_i = 0, map_j = 0;
  std::optional<std::pair<std::size_t, std::size_t>> part_pair;
};

struct Certificate {
  Verdict verdict = Verdict::Holds;
  std::optional<CollisionWitness> witness;
  std::uint64_t pairs_checked = 0;
  Tolerance tol_used{};
  bool sign_variant = false;
  bool vacuous = false;

  bool holds() const { return verdict == Verdict::Holds; }
};

struct CertifyOptions {
  Tolerance tol{};
  int threads = 1;
  std::uint64_t pair_cap = MapFamily::kDefaultCap;
  /// Disables the exact pair reductions for group-structured families
  /// (used to test that they change nothing).
  bool force_naive = false;
};

/// hsp (or hsp_pm) for one unordered map pair on a single subspace. The test
/// is exact at tolerance: with N = ker[T1 B | -T2 B] and D = ker[B | -B],
/// the property holds iff N lies inside D (sign variant: inside D or inside
/// D' = ker[B | B]; a subspace inside a union of two subspaces lies in one).
Certificate hsp_pair(const SubspaceR& v, const LinearMap& t1, const LinearMap& t2,
                     bool sign_variant, const CertifyOptions& opts = {});

/// hsp over all unordered pairs of the family, diagonal included; stops at
/// the first violation in deterministic pair order.
Certificate hsp_set(const SubspaceR& v, const MapFamily& family, bool sign_variant,
                    const CertifyOptions& opts = {});

/// hsp for a union of subspaces: every pair of parts against every map pair.
Certificate hsp_arrangement(const SubspaceArrangement<Real>& arr, const MapFamily& family,
                            bool sign_variant, const CertifyOptions& opts = {});

/// hsp for the k-sparse vectors of R^n under the family composed with A:
/// the structured arrangement over all C(n,k) coordinate supports.
Certificate hsp_ksparse(const MatR& a, int k, const MapFamily& family, bool sign_variant,
                        const CertifyOptions& opts = {});

/// Re-verifies a stored witness against the certificate invariants; runs on
/// every emission and is available to callers as an independent check.
bool verify_witness(const Certificate& cert);

}  // namespace hsense

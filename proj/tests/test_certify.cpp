#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hsense/certify.hpp"
#include "hsense/pencil.hpp"

using namespace hsense;

namespace {

SubspaceR line(double x, double y) {
  MatR b(2, 1);
  b << x, y;
  return SubspaceR::span_of(b);
}

}  // namespace

TEST_CASE("hsp_pair hand cases") {
  auto id2 = LinearMap::permutation({0, 1});
  auto swap2 = LinearMap::permutation({1, 0});
  SubspaceR v = line(1, -1);

  // swap maps (1,-1) to (-1,1): a collision with v1 != v2
  auto cert = hsp_pair(v, id2, swap2, false);
  REQUIRE_FALSE(cert.holds());
  REQUIRE(cert.witness.has_value());
  CHECK(verify_witness(cert));
  const auto& w = *cert.witness;
  CHECK((w.tau1.apply(w.v1) - w.tau2.apply(w.v2)).norm() < 1e-10);
  CHECK((w.v1 - w.v2).norm() > 1e-3);

  // but v2 = -v1, so the sign variant holds
  CHECK(hsp_pair(v, id2, swap2, true).holds());

  // injective tau1 = tau2 always holds
  CHECK(hsp_pair(v, id2, id2, false).holds());
}

TEST_CASE("hsp_pair: zero subspace holds vacuously") {
  auto id2 = LinearMap::permutation({0, 1});
  auto cert = hsp_pair(SubspaceR::zero(2), id2, id2, false);
  CHECK(cert.holds());
  CHECK(cert.vacuous);
}

TEST_CASE("hsp_set hand case: n=1, V=span{(1,2)}, permutations of 2") {
  // (a,2a) = (2b,b) forces a = b = 0
  SubspaceR v = line(1, 2);
  auto cert = hsp_set(v, MapFamily::permutations(2), false);
  CHECK(cert.holds());
  CHECK(cert.pairs_checked > 0);
}

TEST_CASE("hsp_set: odd m = r with n >= 2 is always violated") {
  // m = 3 permutations acting on a 2-dim subspace: violated for every seed
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    auto fam = MapFamily::permutations(3).composed_with(random_sensing_matrix(3, 2, seed));
    auto cert = hsp_set(SubspaceR::full(2), fam, false);
    REQUIRE_FALSE(cert.holds());
    CHECK(verify_witness(cert));
  }
}

TEST_CASE("hsp_set: m = 2n permutations hold across seeds") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    auto fam = MapFamily::permutations(4).composed_with(random_sensing_matrix(4, 2, seed));
    CHECK(hsp_set(SubspaceR::full(2), fam, false).holds());
  }
}

TEST_CASE("group reduction matches the naive pair scan") {
  CertifyOptions naive;
  naive.force_naive = true;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    // permutations at the boundary m = 3 (violated) and m = 4 (holds)
    for (int m : {3, 4}) {
      auto fam = MapFamily::permutations(m).composed_with(random_sensing_matrix(m, 2, seed));
      const bool fast = hsp_set(SubspaceR::full(2), fam, false).holds();
      const bool slow = hsp_set(SubspaceR::full(2), fam, false, naive).holds();
      CHECK(fast == slow);
    }
    // signs, both variants
    auto bfam = MapFamily::signs(3).composed_with(random_sensing_matrix(3, 2, seed));
    for (bool pm : {false, true}) {
      CHECK(hsp_set(SubspaceR::full(2), bfam, pm).holds() ==
            hsp_set(SubspaceR::full(2), bfam, pm, naive).holds());
    }
    // signed selections
    auto sfam =
        MapFamily::signed_selections(2, 3).composed_with(random_sensing_matrix(3, 1, seed));
    for (bool pm : {false, true}) {
      CHECK(hsp_set(SubspaceR::full(1), sfam, pm).holds() ==
            hsp_set(SubspaceR::full(1), sfam, pm, naive).holds());
    }
  }
}

TEST_CASE("witnesses re-verify on every violated verdict") {
  int violated = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto fam = MapFamily::selections(2, 5).composed_with(random_sensing_matrix(5, 2, seed));
    auto cert = hsp_set(SubspaceR::full(2), fam, false);
    if (!cert.holds()) {
      ++violated;
      CHECK(verify_witness(cert));
      const auto& w = *cert.witness;
      CHECK(std::abs(w.v1.norm() - 1.0) < 1e-9);  // reporting normalization
    }
  }
  CHECK(violated == 20);  // r = 2 < 2n - 1 never certifies
}

TEST_CASE("sampling soundness: holds verdicts admit no constructed counterexample") {
  auto a = random_sensing_matrix(4, 2, 31);
  auto fam = MapFamily::permutations(4).composed_with(a);
  auto cert = hsp_set(SubspaceR::full(2), fam, false);
  REQUIRE(cert.holds());

  auto maps = fam.enumerate();
  Rng rng(77);
  const SubspaceR v = SubspaceR::full(2);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto& t1 = maps[rng.uniform_below(maps.size())];
    const auto& t2 = maps[rng.uniform_below(maps.size())];
    MatR cat(4, 4);
    cat.leftCols(2) = t1.matrix();
    cat.rightCols(2) = -t2.matrix();
    auto n = null_space(cat);
    if (n.dim() == 0) continue;
    VecR coeff = random_matrix(n.dim(), 1, rng);
    VecR w = n.basis() * coeff;
    VecR v1 = w.head(2), v2 = w.tail(2);
    // tau1(v1) = tau2(v2) by construction; hsp says v1 = v2
    CHECK((t1.matrix() * v1 - t2.matrix() * v2).norm() < 1e-8);
    CHECK((v1 - v2).norm() < 1e-8 * std::max(1.0, v1.norm()));
  }
}

TEST_CASE("monotonicity: sub-families of a holding family hold") {
  auto a = random_sensing_matrix(4, 2, 5);
  auto fam = MapFamily::permutations(4).composed_with(a);
  REQUIRE(hsp_set(SubspaceR::full(2), fam, false).holds());

  Rng rng(123);
  auto maps = fam.enumerate();
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<LinearMap> sub;
    for (const auto& t : maps)
      if (rng.uniform() < 0.3) sub.push_back(t);
    if (sub.empty()) continue;
    CHECK(hsp_set(SubspaceR::full(2), MapFamily::explicit_list(sub), false).holds());
  }
}

TEST_CASE("consistency with condition 1") {
  // whenever check_condition_1 passes, a fresh random d-subspace certifies
  auto fam = MapFamily::permutations(4);
  auto rep = check_condition_1(fam, 2);
  REQUIRE(rep.all_pass);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto v = random_subspace(4, 2, seed);
    CHECK(hsp_set(v, fam, false).holds());
  }
}

TEST_CASE("pm weakening: plain hsp implies the sign variant") {
  Rng rng(2027);
  auto fam = MapFamily::selections(4, 5);
  auto draws = fam.sample(66, 30);
  for (int k = 0; k + 1 < 30; k += 2) {
    auto v = random_subspace_of<Real>(5, 2, rng);
    auto plain = hsp_pair(v, draws[k], draws[k + 1], false);
    if (plain.holds()) CHECK(hsp_pair(v, draws[k], draws[k + 1], true).holds());
  }
}

TEST_CASE("arrangement: single part reduces to hsp_set") {
  auto a = random_sensing_matrix(4, 2, 10);
  auto fam = MapFamily::permutations(4).composed_with(a);
  SubspaceArrangement<Real> arr(std::vector<SubspaceR>{SubspaceR::full(2)});
  CHECK(hsp_arrangement(arr, fam, false).holds() ==
        hsp_set(SubspaceR::full(2), fam, false).holds());
}

TEST_CASE("k-sparse certificates at the sparse thresholds") {
  // k=1, n=3, m=2 permutations hold (m >= 2k)
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto cert = hsp_ksparse(random_sensing_matrix(2, 3, seed), 1, MapFamily::permutations(2), false);
    CHECK(cert.holds());
  }
  // 1x3 sensing collides two 1-sparse vectors
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto cert = hsp_ksparse(random_sensing_matrix(1, 3, seed), 1, MapFamily::permutations(1), false);
    REQUIRE_FALSE(cert.holds());
    CHECK(verify_witness(cert));
    CHECK(cert.witness->part_pair.has_value());
  }
  // k=1, n=4, m=2 signs with the sign variant hold
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto cert = hsp_ksparse(random_sensing_matrix(2, 4, seed), 1, MapFamily::signs(2), true);
    CHECK(cert.holds());
  }
}

TEST_CASE("k = n sparse reduces to the full space") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto a = random_sensing_matrix(4, 2, seed);
    auto fam = MapFamily::permutations(4);
    auto sparse = hsp_ksparse(a, 2, fam, false);
    auto full = hsp_set(SubspaceR::full(2), fam.composed_with(a), false);
    CHECK(sparse.holds() == full.holds());
  }
}

TEST_CASE("cap errors carry the exact cardinality") {
  CertifyOptions opts;
  opts.pair_cap = 10;
  auto fam = MapFamily::permutations(4).composed_with(random_sensing_matrix(4, 2, 1));
  CHECK_THROWS_AS(hsp_set(SubspaceR::full(2), fam, false, opts), FamilyCapExceeded);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hsense/pencil.hpp"

using namespace hsense;

namespace {

const EigCandidate* find_candidate(const PencilSpectrum& s, Complex lambda, double eps = 1e-8) {
  for (const auto& c : s.candidates)
    if (std::abs(c.lambda - lambda) < eps) return &c;
  return nullptr;
}

/// Candidate sets agree within 1e-8 and every eigdim matches exactly;
/// ker dims and the singular structure match too.
void check_agreement(const PencilSpectrum& comb, const PencilSpectrum& num) {
  REQUIRE(comb.candidates.size() == num.candidates.size());
  for (const auto& c : comb.candidates) {
    const EigCandidate* match = find_candidate(num, c.lambda);
    REQUIRE(match != nullptr);
    CHECK(match->eigdim == c.eigdim);
  }
  CHECK(comb.ker1_dim == num.ker1_dim);
  CHECK(comb.ker2_dim == num.ker2_dim);
  CHECK(comb.ker_diff_dim == num.ker_diff_dim);
  CHECK(comb.ker_sum_dim == num.ker_sum_dim);
  CHECK(comb.generic_dim == num.generic_dim);
  CHECK(comb.common_kernel_dim == num.common_kernel_dim);
  CHECK(comb.path_family_count == num.path_family_count);
}

}  // namespace

TEST_CASE("eig_subspace hand cases") {
  auto id2 = LinearMap::permutation({0, 1});
  auto swap2 = LinearMap::permutation({1, 0});

  CHECK(eig_subspace(id2, id2, Complex(1, 0)).dim() == 2);  // full space

  // w = -swap(w) solves to span{(1,-1)}
  auto e = eig_subspace(id2, swap2, Complex(-1, 0));
  REQUIRE(e.dim() == 1);
  CHECK(std::abs(e.basis()(0, 0) + e.basis()(1, 0)) < 1e-12);

  // lambda = 0 collapses to ker tau1
  auto sel = LinearMap::selection(3, {0, 1});
  CHECK(eig_subspace(sel, LinearMap::selection(3, {1, 2}), Complex(0, 0)).dim() == 1);
}

TEST_CASE("combinatorial spectrum: equal permutations") {
  auto p = LinearMap::permutation({2, 0, 1});
  auto s = spectrum_combinatorial(p, p);
  REQUIRE(s.candidates.size() == 1);
  CHECK(s.candidates[0].is_one);
  CHECK(s.candidates[0].eigdim == 3);
  CHECK(s.candidates[0].inside_Z);
  CHECK(s.path_family_count == 0);
  CHECK(dim_U(s, false) == -1);  // U empty
}

TEST_CASE("combinatorial spectrum: identity vs 3-cycle") {
  // relations w_k = lambda w_{cycle(k)}: one 3-cycle, candidates at the cube
  // roots of unity, eigdim 1 each (hand derivation)
  auto id3 = LinearMap::permutation({0, 1, 2});
  auto cyc = LinearMap::permutation({1, 2, 0});
  auto s = spectrum_combinatorial(id3, cyc);
  REQUIRE(s.candidates.size() == 3);
  for (const auto& c : s.candidates) {
    CHECK(c.eigdim == 1);
    CHECK(std::abs(std::pow(c.lambda, 3.0) - Complex(1, 0)) < 1e-12);
  }
  CHECK(dim_U(s, false) == 1);
  CHECK(s.generic_dim == 0);
}

TEST_CASE("combinatorial spectrum: selection chain is a path family") {
  // S1 rows (0,1), S2 rows (1,2): w0 = l w1, w1 = l w2 solves for every
  // lambda != 0 with eigenvector (l^2, l, 1)
  auto s1 = LinearMap::selection(3, {0, 1});
  auto s2 = LinearMap::selection(3, {1, 2});
  auto s = spectrum_combinatorial(s1, s2);
  CHECK(s.candidates.empty());
  CHECK(s.path_family_count == 1);
  CHECK(s.generic_dim == 1);
  CHECK(s.common_kernel_dim == 0);
  // closure of the union over lambda is 2-dimensional
  CHECK(dim_U(s, false) == 2);
}

TEST_CASE("combinatorial spectrum: sign pairs") {
  auto b_id = LinearMap::sign_map({1, 1});
  auto s_same = spectrum_combinatorial(b_id, b_id);
  REQUIRE(s_same.candidates.size() == 1);
  CHECK(s_same.candidates[0].is_one);

  auto b_mix = LinearMap::sign_map({1, -1});
  auto s = spectrum_combinatorial(b_id, b_mix);
  REQUIRE(s.candidates.size() == 2);
  const auto* at1 = find_candidate(s, Complex(1, 0));
  const auto* atm1 = find_candidate(s, Complex(-1, 0));
  REQUIRE(at1 != nullptr);
  REQUIRE(atm1 != nullptr);
  CHECK(at1->eigdim == 1);
  CHECK(atm1->eigdim == 1);

  // lambda = -1 survives Z for the plain variant but is cut by U_pm; the
  // sign variant leaves nothing
  CHECK(dim_U(s, false) == 1);
  CHECK(dim_U(s, true) == -1);
}

TEST_CASE("numeric spectrum: identity pair and diagonal pair") {
  auto id3 = LinearMap::explicit_matrix(MatR::Identity(3, 3));
  auto s = spectrum_numeric(id3, id3);
  REQUIRE(s.candidates.size() == 1);
  CHECK(s.candidates[0].is_one);
  CHECK(s.candidates[0].eigdim == 3);

  MatR d(3, 3);
  d.setZero();
  d(0, 0) = 2;
  d(1, 1) = 3;
  d(2, 2) = 5;
  auto sd = spectrum_numeric(LinearMap::explicit_matrix(d),
                             LinearMap::explicit_matrix(MatR::Identity(3, 3)));
  REQUIRE(sd.candidates.size() == 3);
  CHECK(find_candidate(sd, Complex(2, 0), 1e-7) != nullptr);
  CHECK(find_candidate(sd, Complex(3, 0), 1e-7) != nullptr);
  CHECK(find_candidate(sd, Complex(5, 0), 1e-7) != nullptr);
}

TEST_CASE("numeric spectrum: random square pencils have simple eigenvalues") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    const Index n = 4;
    auto t1 = LinearMap::explicit_matrix(random_matrix(n, n, rng));
    auto t2 = LinearMap::explicit_matrix(random_matrix(n, n, rng));
    auto s = spectrum_numeric(t1, t2);
    CHECK(s.generic_dim == 0);
    CHECK(s.candidates.size() == static_cast<std::size_t>(n));
    for (const auto& c : s.candidates) CHECK(c.eigdim == 1);
  }
}

TEST_CASE("cross-oracle: combinatorial agrees with numeric on the 3-cycle") {
  auto id3 = LinearMap::permutation({0, 1, 2});
  auto cyc = LinearMap::permutation({1, 2, 0});
  check_agreement(spectrum_combinatorial(id3, cyc), spectrum_numeric(id3, cyc));
}

TEST_CASE("cross-oracle: exhaustive at small sizes") {
  auto run = [](const MapFamily& fam) {
    auto maps = fam.enumerate();
    for (std::size_t i = 0; i < maps.size(); ++i)
      for (std::size_t j = i; j < maps.size(); ++j) {
        CAPTURE(maps[i].describe());
        CAPTURE(maps[j].describe());
        auto comb = spectrum_combinatorial(maps[i], maps[j]);
        auto num = spectrum_numeric(maps[i], maps[j]);
        check_agreement(comb, num);
        CHECK(dim_U(comb, false) == dim_U(num, false));
        CHECK(dim_U(comb, true) == dim_U(num, true));
      }
  };
  run(MapFamily::permutations(3));
  run(MapFamily::selections(2, 3));
  run(MapFamily::signs(3));
  run(MapFamily::selections(2, 4));
}

TEST_CASE("cross-oracle: sampled signed selections at m=5") {
  auto fam = MapFamily::signed_selections(3, 5);
  auto draws = fam.sample(424242, 24);
  for (int k = 0; k + 1 < 24; k += 2) {
    auto comb = spectrum_combinatorial(draws[k], draws[k + 1]);
    auto num = spectrum_numeric(draws[k], draws[k + 1]);
    CAPTURE(draws[k].describe());
    CAPTURE(draws[k + 1].describe());
    check_agreement(comb, num);
    CHECK(dim_U(comb, false) == dim_U(num, false));
    CHECK(dim_U(comb, true) == dim_U(num, true));
  }
}

TEST_CASE("pencil invariants: distinct candidates intersect inside the common kernel") {
  auto fam = MapFamily::selections(3, 4);
  auto draws = fam.sample(7, 10);
  for (int k = 0; k + 1 < 10; k += 2) {
    auto s = spectrum_combinatorial(draws[k], draws[k + 1]);
    for (std::size_t a = 0; a < s.candidates.size(); ++a)
      for (std::size_t b = a + 1; b < s.candidates.size(); ++b) {
        auto ea = eig_subspace(draws[k], draws[k + 1], s.candidates[a].lambda);
        auto eb = eig_subspace(draws[k], draws[k + 1], s.candidates[b].lambda);
        auto both = intersect(ea, eb);
        auto t1c = complexify(extend_square(draws[k].matrix()));
        auto t2c = complexify(extend_square(draws[k + 1].matrix()));
        auto common = intersect(null_space(t1c), null_space(t2c));
        CHECK(contained_in(both, common));
      }
  }
}

TEST_CASE("eig_subspace at lambda=1 is exactly ker(T1 - T2)") {
  auto p1 = LinearMap::permutation({1, 0, 2, 3});
  auto p2 = LinearMap::permutation({0, 1, 3, 2});
  auto e1 = eig_subspace(p1, p2, Complex(1, 0));
  auto direct = null_space(MatC(complexify(p1.matrix() - p2.matrix())));
  CHECK(same_subspace(e1, direct));
}

TEST_CASE("dim_U: sign variant is never larger") {
  auto fam = MapFamily::signed_selections(2, 4);
  auto draws = fam.sample(99, 20);
  for (int k = 0; k + 1 < 20; k += 2) {
    auto s = spectrum_combinatorial(draws[k], draws[k + 1]);
    CHECK(dim_U(s, true) <= dim_U(s, false));
  }
}

TEST_CASE("Lemma-style bounds at audit scale: permutations of 4, n=2") {
  auto maps = MapFamily::permutations(4).enumerate();
  for (std::size_t i = 0; i < maps.size(); ++i)
    for (std::size_t j = i; j < maps.size(); ++j) {
      auto s = spectrum_combinatorial(maps[i], maps[j]);
      CHECK(dim_U(s, false) <= 4 - 2);
    }
}

TEST_CASE("check_condition_1 examples") {
  // permutations of 4 with d=2 pass (dim U <= m - n = 2)
  auto rep = check_condition_1(MapFamily::permutations(4), 2);
  CHECK(rep.all_pass);
  CHECK(rep.max_dimU <= 2);

  // selections r=2 of 3 with d=2: rank 2 < 4 fails
  auto rep2 = check_condition_1(MapFamily::selections(2, 3), 2);
  CHECK_FALSE(rep2.all_pass);
  CHECK(rep2.rank_failures.size() == 6);

  // signs of 3 with the sign variant, d=1: U_pm empty for all pairs
  Condition1Options opts;
  opts.sign_variant = true;
  auto rep3 = check_condition_1(MapFamily::signs(3), 1, opts);
  CHECK(rep3.all_pass);
  CHECK(rep3.max_dimU == -1);
}

TEST_CASE("spectrum_combinatorial rejects explicit maps") {
  auto e = LinearMap::explicit_matrix(MatR::Identity(2, 2));
  CHECK_THROWS_AS(spectrum_combinatorial(e, e), std::invalid_argument);
}

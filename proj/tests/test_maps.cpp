#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "hsense/maps.hpp"

using namespace hsense;

TEST_CASE("family cardinalities") {
  CHECK(MapFamily::permutations(3).cardinality() == 6);
  CHECK(MapFamily::selections(2, 3).cardinality() == 6);  // 3!/1! arrangements
  CHECK(MapFamily::signs(2).cardinality() == 4);
  CHECK(MapFamily::signed_selections(2, 3).cardinality() == 24);
}

TEST_CASE("enumeration is lexicographic and duplicate free") {
  auto check_family = [](const MapFamily& fam) {
    auto maps = fam.enumerate();
    CHECK(maps.size() == fam.cardinality());
    std::set<std::string> seen;
    std::string prev;
    for (const auto& t : maps) {
      const std::string key = t.describe();
      CHECK(seen.insert(key).second);  // bijection onto the family
    }
    // lexicographic in the defining arrays
    for (std::size_t i = 1; i < maps.size(); ++i) {
      auto a = std::make_pair(maps[i - 1].indices(), maps[i - 1].signs());
      auto b = std::make_pair(maps[i].indices(), maps[i].signs());
      // +1 sorts before -1
      auto flip = [](std::pair<std::vector<int>, std::vector<int>> p) {
        for (auto& s : p.second) s = -s;
        return p;
      };
      CHECK(flip(a) < flip(b));
    }
  };
  check_family(MapFamily::permutations(4));
  check_family(MapFamily::selections(2, 4));
  check_family(MapFamily::signs(3));
  check_family(MapFamily::signed_selections(2, 3));
}

TEST_CASE("enumeration respects the cap") {
  CHECK_THROWS_AS(MapFamily::permutations(12).enumerate(1000), FamilyCapExceeded);
  try {
    MapFamily::permutations(12).enumerate(1000);
  } catch (const FamilyCapExceeded& e) {
    CHECK(e.cardinality == 479001600ULL);  // 12!
  }
}

TEST_CASE("first members are the identity-like representatives") {
  CHECK(MapFamily::permutations(3).at(0).indices() == std::vector<int>{0, 1, 2});
  CHECK(MapFamily::signs(3).at(0).signs() == std::vector<int>{1, 1, 1});
  CHECK(MapFamily::selections(2, 4).at(0).indices() == std::vector<int>{0, 1});
}

TEST_CASE("materialized matrices act like the structured descriptors") {
  auto p = LinearMap::permutation({2, 0, 1});
  VecR x(3);
  x << 5, 7, 9;
  VecR y = p.apply(x);
  CHECK(y(0) == 9);
  CHECK(y(1) == 5);
  CHECK(y(2) == 7);
  CHECK((p.matrix() * x - y).norm() == 0.0);

  auto s = LinearMap::signed_selection(4, {3, 1}, {-1, 1});
  VecR z(4);
  z << 1, 2, 3, 4;
  VecR w = s.apply(z);
  CHECK(w(0) == -4);
  CHECK(w(1) == 2);
}

TEST_CASE("permutations are orthogonal and selections have exact rank") {
  for (const auto& t : MapFamily::permutations(4).enumerate()) {
    MatR m = t.matrix();
    CHECK((m.transpose() * m - MatR::Identity(4, 4)).norm() == 0.0);
  }
  for (const auto& t : MapFamily::selections(3, 5).enumerate()) {
    CHECK(t.structured_rank() == 3);
    CHECK(rank_tol(t.matrix()) == 3);
  }
}

TEST_CASE("signed selection factors as selection times sign matrix") {
  // composition associativity: materialize(SB)*A == S*(B*A) entrywise
  Rng rng(5);
  MatR a = random_matrix(4, 2, rng);
  auto sb = LinearMap::signed_selection(4, {2, 0}, {-1, 1});
  MatR s = LinearMap::selection(4, {2, 0}).matrix();
  MatR b = LinearMap::sign_map({1, 1, -1, 1}).matrix();  // -1 at the selected row 2
  CHECK((sb.matrix() - s * b).norm() == 0.0);
  CHECK((sb.matrix() * a - s * (b * a)).norm() == 0.0);
}

TEST_CASE("composition with a sensing matrix") {
  MatR a = random_sensing_matrix(3, 2, 77);
  auto fam = MapFamily::permutations(3).composed_with(a);
  CHECK(fam.input_dim() == 2);
  auto maps = fam.enumerate();
  VecR x(2);
  x << 1, -2;
  for (const auto& t : maps) {
    CHECK(t.is_composed());
    CHECK((t.apply(x) - t.matrix() * x).norm() < 1e-14);
    CHECK((t.matrix() - t.structured_matrix() * a).norm() < 1e-14);
  }
}

TEST_CASE("sampling is reproducible and uniform") {
  auto fam = MapFamily::permutations(3);
  auto first = fam.sample(123, 50);
  auto second = fam.sample(123, 50);
  for (int i = 0; i < 50; ++i) CHECK(first[i].describe() == second[i].describe());

  // empirical frequency of the identity over 60000 draws: 1/6 +- 0.01
  auto draws = fam.sample(2024, 60000);
  int hits = 0;
  for (const auto& t : draws)
    if (t.indices() == std::vector<int>{0, 1, 2}) ++hits;
  const double freq = hits / 60000.0;
  CHECK(std::abs(freq - 1.0 / 6.0) < 0.01);

  for (const auto& t : MapFamily::signs(1).sample(9, 20))
    CHECK((t.signs()[0] == 1 || t.signs()[0] == -1));
}

TEST_CASE("random sensing matrices are seed determined") {
  CHECK((random_sensing_matrix(4, 3, 42) - random_sensing_matrix(4, 3, 42)).norm() == 0.0);
  CHECK((random_sensing_matrix(4, 3, 42) - random_sensing_matrix(4, 3, 43)).norm() > 0.0);
  CHECK(random_subspace(4, 2, 1).dim() == 2);
}

TEST_CASE("extend_square pads with zeros and keeps rank") {
  auto s = LinearMap::selection(5, {0, 3});
  MatR e = extend_square(s.matrix());
  CHECK(e.rows() == 5);
  CHECK(e.cols() == 5);
  CHECK(rank_tol(e) == 2);
}

TEST_CASE("family and map spec strings") {
  CHECK(parse_family("perm:5").cardinality() == 120);
  CHECK(parse_family("sel:3,5").cardinality() == 60);
  CHECK(parse_family("sign:4").cardinality() == 16);
  CHECK(parse_family("selsign:3,5").cardinality() == 480);
  CHECK_THROWS_AS(parse_family("perm5"), std::invalid_argument);

  CHECK(parse_map("perm:1,2,0").kind() == MapKind::Permutation);
  CHECK(parse_map("sel:5:0,2").target_dim() == 2);
  CHECK(parse_map("sign:1,-1").signs() == std::vector<int>{1, -1});
  auto ss = parse_map("selsign:5:0,2:-1,1");
  CHECK(ss.indices() == std::vector<int>{0, 2});
  CHECK(ss.signs() == std::vector<int>{-1, 1});
}

TEST_CASE("invalid descriptors are rejected") {
  CHECK_THROWS_AS(LinearMap::permutation({0, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(LinearMap::selection(3, {0, 3}), std::invalid_argument);
  CHECK_THROWS_AS(LinearMap::sign_map({1, 2}), std::invalid_argument);
}

#include "coarse/cover.hpp"
#include "coarse/error.hpp"
#include "oracle.hpp"

#include <doctest.h>

using namespace coarse;

namespace {

SpacePtr P5() { return share(FiniteMetricSpace::path(5)); }

}  // namespace

TEST_CASE("cover validation") {
  CHECK_THROWS_AS(Cover(P5(), {{0, 1}, {3, 4}}), InputError);
  try {
    Cover(P5(), {{0, 1}, {3, 4}});
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("'2'") != std::string::npos);
  }
  CHECK_THROWS_AS(Cover(P5(), {{0, 1, 2, 3, 4}, {}}), InputError);
  CHECK_THROWS_AS(Cover(P5(), {{0, 1, 2, 3, 9}}), InputError);
  CHECK_THROWS_AS(Cover(P5(), {{0, 1, 2, 3, 4}}, std::vector<int>{0, 1}), InputError);
}

TEST_CASE("multiplicity") {
  CHECK(multiplicity(Cover(P5(), {{0, 1, 2}, {2, 3, 4}})) == 2);
  auto C6 = share(FiniteMetricSpace::cycle(6));
  CHECK(multiplicity(Cover(C6, {{0}, {1}, {2}, {3}, {4}, {5}})) == 1);
  const PointSet all = all_points(*C6);
  CHECK(multiplicity(Cover(C6, {all, all, all})) == 3);
}

TEST_CASE("R-multiplicity") {
  Cover c(P5(), {{0, 1}, {2}, {3, 4}});
  CHECK(r_multiplicity(c, 0.0) == multiplicity(c));
  CHECK(r_multiplicity(Cover(P5(), {{0, 1, 2}, {3, 4}}), 1.0) == 2);
  CHECK(r_multiplicity(c, 4.0) == 3);
}

TEST_CASE("Lebesgue number") {
  auto X = P5();
  CHECK(lebesgue_number(Cover(X, {all_points(*X)})).value == X->diameter());
  auto zero = lebesgue_number(Cover(X, {{0, 1, 2}, {2, 3, 4}}));
  CHECK(zero.value == 0.0);
  CHECK(zero.smallest_failing == 1.0);
  CHECK(lebesgue_number(Cover(X, {{0, 1, 2, 3}, {2, 3, 4}})).value == 1.0);
}

TEST_CASE("L-separation") {
  auto X = P5();
  CHECK(is_l_separated(*X, {{0, 1, 2}}, 5.0));
  CHECK(is_l_separated(*X, {{0, 1}, {3, 4}}, 1.0));
  CHECK_FALSE(is_l_separated(*X, {{0, 1}, {3, 4}}, 2.0));
}

TEST_CASE("(k, L)-separation") {
  auto X = P5();
  CHECK(check_kl_separated(Cover(X, {all_points(*X)}, std::vector<int>{0}), 0, 100.0));
  CHECK_FALSE(check_kl_separated(Cover(X, {{0, 1, 2}, {2, 3, 4}}, std::vector<int>{0, 0}), 0, 0.5));
  CHECK_THROWS_AS(check_kl_separated(Cover(X, {{0, 1, 2}, {2, 3, 4}}), 1, 1.0), PreconditionError);
  CHECK_THROWS_AS(check_kl_separated(Cover(X, {{0, 1, 2}, {2, 3, 4}}, std::vector<int>{0, 2}), 1, 1.0),
                  PreconditionError);

  // Length-4 blocks on [0,23] with alternating colors; same-colored blocks sit 5 apart.
  auto Z = share(FiniteMetricSpace::z_interval(0, 23));
  std::vector<PointSet> blocks;
  std::vector<int> colors;
  for (int b = 0; b < 6; ++b) {
    PointSet block;
    for (int i = 0; i < 4; ++i) block.push_back(4 * b + i);
    blocks.push_back(block);
    colors.push_back(b % 2);
  }
  Cover alt(Z, blocks, colors);
  for (double L : {1.0, 3.0, 4.0, 5.0, 6.0}) {
    bool expected = true;
    for (int a = 0; a < 6; ++a)
      for (int b = a + 1; b < 6; ++b)
        if (colors[a] == colors[b] && oracle::point_set_distance(*Z, blocks[a], blocks[b]) <= L) expected = false;
    CHECK(check_kl_separated(alt, 1, L) == expected);
  }
}

TEST_CASE("enlargement") {
  auto X = P5();
  Cover c(X, {{0, 1}, {2}, {3, 4}}, std::vector<int>{0, 1, 0});
  CHECK(enlarge(c, 0.0).pieces() == c.pieces());
  CHECK(enlarge(c, 1.0).piece(1) == PointSet{1, 2, 3});
  CHECK(enlarge(c, 1.0).coloring() == c.coloring());
  CHECK(enlarge(c, 4.0).piece(0) == all_points(*X));
}

TEST_CASE("cover search") {
  SUBCASE("interval [0,29], L=3, k_max=1") {
    auto Z = share(FiniteMetricSpace::z_interval(0, 29));
    auto found = asdim_cover_search(Z, 3.0, 1);
    CHECK(multiplicity(found.cover) <= 2);
    CHECK(oracle::all_balls_fit(found.cover, 3.0));
    CHECK(found.diameter_bound <= 18.0);
    for (const auto& p : found.cover.pieces()) CHECK(set_diameter(*Z, p) <= found.diameter_bound);
  }
  SUBCASE("L = 0 gives singletons") {
    auto X = share(FiniteMetricSpace::cycle(7));
    auto found = asdim_cover_search(X, 0.0, 0);
    CHECK(multiplicity(found.cover) == 1);
    CHECK(found.cover.size() == 7);
  }
  SUBCASE("L at least the diameter gives the whole space") {
    auto X = share(FiniteMetricSpace::grid({3, 3}, GridNorm::l1));
    auto found = asdim_cover_search(X, 4.0, 0);
    CHECK(found.cover.size() == 1);
    CHECK(multiplicity(found.cover) == 1);
  }
  SUBCASE("grids and random graphs") {
    oracle::Rng rng(5);
    auto grid = share(FiniteMetricSpace::grid({16, 16}, GridNorm::l1));
    auto found = asdim_cover_search(grid, 2.0, 2);
    CHECK(multiplicity(found.cover) <= 3);
    CHECK(oracle::all_balls_fit(found.cover, 2.0));
    auto g = oracle::random_graph(rng, 40);
    try {
      auto f2 = asdim_cover_search(g, 1.0, 3);
      CHECK(multiplicity(f2.cover) <= 4);
      CHECK(oracle::all_balls_fit(f2.cover, 1.0));
    } catch (const SearchExhausted&) {
      // An inconclusive search is a legitimate outcome on arbitrary graphs.
    }
  }
  SUBCASE("impossible request is inconclusive, not an input error") {
    auto grid = share(FiniteMetricSpace::grid({12, 12}, GridNorm::l1));
    CHECK_THROWS_AS(asdim_cover_search(grid, 3.0, 0), SearchExhausted);
  }
}

TEST_CASE("direct-limit cover") {
  auto Z = share(FiniteMetricSpace::z_interval(-20, 20));
  auto interval = [&](int n) {
    PointSet m;
    for (int v = -n; v <= n; ++v) m.push_back(*Z->find(std::to_string(v)));
    return m;
  };
  SUBCASE("chain [-n, n], L = 1") {
    ChainOfSubspaces chain{Z, {}};
    for (int n = 1; n <= 20; ++n) chain.members.push_back(interval(n));
    auto d = direct_limit_cover(chain, 1.0);
    REQUIRE(d.subsequence.size() >= 3);
    CHECK(d.subsequence[0] == 0);
    CHECK(d.subsequence[1] == 3);
    CHECK(d.subsequence[2] == 6);
    CHECK(multiplicity(d.cover) <= 2);
    CHECK(oracle::all_balls_fit(d.cover, 1.0));
    CHECK(direct_limit_disjointness(chain, d, 1.0));
    CHECK(d.truncation_affected.back());
  }
  SUBCASE("single-space chain") {
    ChainOfSubspaces chain{Z, {all_points(*Z)}};
    auto d = direct_limit_cover(chain, 1.0);
    CHECK(d.cover.size() == 1);
    CHECK(d.cover.piece(0) == all_points(*Z));
  }
  SUBCASE("stalled chains skip duplicates") {
    ChainOfSubspaces chain{Z, {interval(1), interval(1), interval(5), interval(5), interval(20)}};
    auto d = direct_limit_cover(chain, 1.0);
    CHECK(d.subsequence == std::vector<int>{0, 2, 4});
    CHECK(multiplicity(d.cover) <= 2);
  }
  SUBCASE("L must be positive") {
    ChainOfSubspaces chain{Z, {interval(3), interval(20)}};
    CHECK_THROWS_AS(direct_limit_cover(chain, 0.0), PreconditionError);
  }
}

TEST_CASE("property: the two cover facts, exhaustively on random covers") {
  oracle::Rng rng(23);
  int separated_instances = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto X = oracle::random_space(rng, rng.uniform(3, 50));
    const int pieces = rng.uniform(1, 6);
    Cover c = oracle::random_cover(rng, X, pieces);
    std::vector<int> colors;
    const int k = rng.uniform(0, 3);
    for (int i = 0; i < pieces; ++i) colors.push_back(rng.uniform(0, k));
    Cover colored(X, c.pieces(), colors);
    CHECK(multiplicity(c) == oracle::multiplicity(c));
    CHECK(lebesgue_number(c).value == oracle::lebesgue(c));
    for (double L : {0.5, 1.0, 2.0, 3.0}) {
      CHECK(r_multiplicity(c, L) == oracle::r_multiplicity(c, L));
      if (check_kl_separated(colored, k, 2.0 * L)) {
        ++separated_instances;
        CHECK(oracle::r_multiplicity(colored, L) <= k + 1);
      }
      const int m = oracle::r_multiplicity(c, L);
      Cover big = enlarge(c, L);
      CHECK(oracle::multiplicity(big) <= m);
      CHECK(oracle::all_balls_fit(big, L));
      Cover twice = enlarge(enlarge(c, L), 1.0);
      Cover once = enlarge(c, L + 1.0);
      for (int i = 0; i < c.size(); ++i) CHECK(is_subset(twice.piece(i), once.piece(i)));
    }
  }
  CHECK(separated_instances > 0);
}

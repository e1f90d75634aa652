#include "coarse/error.hpp"
#include "coarse/group.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <memory>

using namespace coarse;

namespace {

GroupPtr shared(GroupModel g) { return std::make_shared<const GroupModel>(std::move(g)); }

CoarseQuasiAction isometric(int group_order, int cycle) {
  auto G = shared(GroupModel::cyclic(group_order));
  auto X = share(FiniteMetricSpace::cycle(cycle));
  return certify_quasi_action(G, X, translation_maps(*G, *X, {1}), {});
}

CoarseQuasiAction perturbed(std::uint64_t seed) {
  auto G = shared(GroupModel::cyclic(60));
  auto X = share(FiniteMetricSpace::cycle(12));
  auto maps = perturb_maps(translation_maps(*G, *X, {1}), *X, random_offsets(G->size(), X->size(), 1, seed));
  return certify_quasi_action(G, X, maps, {});
}

// Two arcs of C_12 overlapping in two vertices at each end.
Cover arcs(const SpacePtr& C12) {
  return Cover(C12, {{0, 1, 2, 3, 4, 5, 6, 7}, {0, 1, 6, 7, 8, 9, 10, 11}});
}

}  // namespace

TEST_CASE("word metrics") {
  auto Z6 = word_metric_space(GroupModel::cyclic(6));
  CHECK(Z6->d(0, 3) == 3.0);
  auto K4 = word_metric_space(GroupModel::product({2, 2}));
  CHECK(K4->size() == 4);
  CHECK(K4->diameter() == 2.0);
  auto F2 = GroupModel::free_ball({'a', 'b'}, 2);
  CHECK(F2.size() == 17);
  int by_length[3] = {0, 0, 0};
  for (Element g = 0; g < F2.size(); ++g) ++by_length[F2.length(g)];
  CHECK(by_length[0] == 1);
  CHECK(by_length[1] == 4);
  CHECK(by_length[2] == 12);
  CHECK(F2.label(F2.identity()) == "e");
  CHECK(F2.inverse(F2.element("ab")) == F2.element("BA"));
  CHECK_FALSE(F2.mul(F2.element("ab"), F2.element("a")).has_value());
  CHECK(F2.truncation_radius() == 2);
}

TEST_CASE("word metric is left-invariant on finite groups up to order 200") {
  std::vector<GroupModel> groups;
  for (int n : {1, 2, 5, 12, 60, 200}) groups.push_back(GroupModel::cyclic(n));
  groups.push_back(GroupModel::product({2, 2}));
  groups.push_back(GroupModel::product({3, 4}));
  groups.push_back(GroupModel::product({2, 3, 5}));
  groups.push_back(GroupModel::product({10, 20}));
  for (const auto& G : groups) {
    REQUIRE(G.size() <= 200);
    auto W = word_metric_space(G);
    bool invariant = true;
    for (Element g = 0; g < G.size(); ++g)
      for (Element h = 0; h < G.size(); ++h)
        for (Element k = 0; k < G.size(); ++k)
          if (W->d(*G.mul(g, h), *G.mul(g, k)) != W->d(h, k)) invariant = false;
    CHECK(invariant);
  }
}

TEST_CASE("quasi-action constants") {
  SUBCASE("isometric Z_12 on C_4") {
    auto a = isometric(12, 4);
    CHECK(a.A == 0.0);
    CHECK(a.B == 0.0);
    for (std::size_t i = 0; i < a.radii.size(); ++i) CHECK(a.modulus[i] == a.radii[i]);
  }
  SUBCASE("identity action") {
    auto G = shared(GroupModel::cyclic(5));
    auto X = share(FiniteMetricSpace::path(4));
    ActionMaps id(5, std::vector<Point>{0, 1, 2, 3});
    auto a = certify_quasi_action(G, X, id, {});
    CHECK(a.A == 0.0);
    CHECK(a.B == 0.0);
    for (std::size_t i = 0; i < a.radii.size(); ++i) CHECK(a.modulus[i] == a.radii[i]);
  }
  SUBCASE("perturbed Z_60 on C_12") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
      auto a = perturbed(seed);
      CHECK(a.A <= 1.0);
      CHECK(a.B <= 3.0);
      for (std::size_t i = 0; i < a.radii.size(); ++i) CHECK(a.modulus[i] <= a.radii[i] + 2.0);
      // Tightness: the recorded witnesses attain the constants.
      CHECK(a.space->d(a.apply(a.group->identity(), a.a_point), a.a_point) == a.A);
      const Element gh = *a.group->mul(a.b_g, a.b_h);
      CHECK(a.space->d(a.apply(a.b_g, a.apply(a.b_h, a.b_x)), a.apply(gh, a.b_x)) == a.B);
      // Dense recomputation of A and B.
      double A = 0.0, B = 0.0;
      const auto& G = *a.group;
      for (Point x = 0; x < 12; ++x) A = std::max(A, a.space->d(a.apply(G.identity(), x), x));
      for (Element g = 0; g < G.size(); ++g)
        for (Element h = 0; h < G.size(); ++h)
          for (Point x = 0; x < 12; ++x)
            B = std::max(B, a.space->d(a.apply(g, a.apply(h, x)), a.apply(*G.mul(g, h), x)));
      CHECK(A == a.A);
      CHECK(B == a.B);
    }
  }
  SUBCASE("ceilings") {
    auto G = shared(GroupModel::cyclic(60));
    auto X = share(FiniteMetricSpace::cycle(12));
    auto maps = perturb_maps(translation_maps(*G, *X, {1}), *X, random_offsets(60, 12, 1, 7));
    QuasiActionCeilings tight;
    tight.B = 0.0;
    CHECK_THROWS_AS(certify_quasi_action(G, X, maps, {}, tight), CeilingExceeded);
    QuasiActionCeilings loose;
    loose.A = 1.0;
    loose.B = 3.0;
    loose.modulus = std::make_pair(1.0, 2.0);
    CHECK_NOTHROW(certify_quasi_action(G, X, maps, {}, loose));
  }
}

TEST_CASE("quasi-stabilizers") {
  SUBCASE("Z ball translating an interval") {
    auto G = shared(GroupModel::free_ball({'a'}, 10));
    auto X = share(FiniteMetricSpace::z_interval(-10, 10));
    auto a = certify_quasi_action(G, X, translation_maps(*G, *X, {1}), {});
    auto W = quasi_stabilizer(a, *X->find("0"), 3.0);
    std::vector<std::string> labels;
    for (Point g : W.members.members) labels.push_back(G->label(g));
    std::sort(labels.begin(), labels.end());
    std::vector<std::string> expected{"A", "AA", "AAA", "a", "aa", "aaa", "e"};
    std::sort(expected.begin(), expected.end());
    CHECK(labels == expected);
  }
  SUBCASE("kernel of Z_12 on C_4") {
    auto a = isometric(12, 4);
    auto W = quasi_stabilizer(a, 0, 0.0);
    CHECK(W.members.members == PointSet{0, 4, 8});
  }
  SUBCASE("perturbed action and monotonicity") {
    auto a = perturbed(11);
    auto W1 = quasi_stabilizer(a, 0, 1.0);
    PointSet computed;
    for (Element g = 0; g < a.group->size(); ++g)
      if (a.space->d(a.apply(g, 0), 0) <= 1.0) computed.push_back(g);
    CHECK(W1.members.members == computed);
    // Multiples of 12 move x0 only by the perturbation, which is at most 1.
    const PointSet kernel{0, 12, 24, 36, 48};
    CHECK(is_subset(kernel, W1.members.members));
    for (double T : {0.0, 1.0, 2.0, 3.0, 4.0, 5.0}) {
      auto lo = quasi_stabilizer(a, 0, T);
      auto hi = quasi_stabilizer(a, 0, T + 1.0);
      CHECK(is_subset(lo.members.members, hi.members.members));
    }
  }
}

TEST_CASE("orbit maps") {
  SUBCASE("Z translating itself") {
    auto G = shared(GroupModel::free_ball({'a'}, 8));
    auto X = share(FiniteMetricSpace::z_interval(-8, 8));
    auto a = certify_quasi_action(G, X, translation_maps(*G, *X, {1}), {});
    auto o = orbit_map(a, *X->find("0"));
    CHECK(o.lambda == 1.0);
    // Clamping at the ends makes the truncated translation a quasi-action
    // only; the realized Lipschitz constant is still 1.
    CHECK(o.max_step == 1.0);
    CHECK(o.constant == a.modulus_at(1.0) + a.B);
    CHECK(o.check.pass);
  }
  SUBCASE("Z_12 on C_4") {
    auto a = isometric(12, 4);
    auto o = orbit_map(a, 0);
    CHECK(o.lambda == 1.0);
    CHECK(o.max_step <= 1.0);
    CHECK(o.check.pass);
  }
  SUBCASE("perturbed action, exhaustive step bound") {
    auto a = perturbed(13);
    auto o = orbit_map(a, 0);
    CHECK(o.constant == a.modulus_at(o.lambda) + a.B);
    double step = 0.0;
    for (Element g = 0; g < a.group->size(); ++g)
      for (Element s : a.group->generators())
        step = std::max(step, a.space->d(a.apply(g, 0), a.apply(*a.group->mul(g, s), 0)));
    CHECK(step == o.max_step);
    CHECK(step <= o.constant);
    CHECK(o.check.pass);
  }
}

TEST_CASE("group pipeline") {
  SUBCASE("Z_12 on C_4 with the trivial cover degenerates to the provider witness") {
    auto a = isometric(12, 4);
    Cover U(a.space, {all_points(*a.space)});
    auto r = group_pipeline(a, U, {0, 1.0, 6.0}, uniform_ball_provider(1.0));
    CHECK(r.T == 2.0);
    CHECK(r.stabilizer.members.members.size() == 12);
    CHECK(all_pass(r.checks));
    REQUIRE(r.glued);
    auto direct = uniform_ball_witness(a.group_space, 1.0);
    const double grid[] = {0.0, 1.0, 2.0};
    auto v0 = variation_profile(direct, grid);
    auto v1 = variation_profile(r.glued->witness, grid);
    for (int i = 0; i < 3; ++i) CHECK(v1[i].value == doctest::Approx(v0[i].value).epsilon(1e-12));
  }
  SUBCASE("Z_60 on C_12, isometric") {
    auto a = isometric(60, 12);
    auto U = arcs(a.space);
    auto r = group_pipeline(a, U, {0, 1.0, 40.0}, uniform_ball_provider(1.0));
    CHECK(r.k == 1);
    CHECK(r.L == 1.0);
    CHECK(all_pass(r.checks));
    REQUIRE(r.partition);
    REQUIRE(r.glued);
    // phi o pi differences, recomputed densely.
    double v = 0.0;
    for (Element g = 0; g < 60; ++g)
      for (Element h = 0; h < 60; ++h)
        if (a.group_space->d(g, h) <= 1.0) v = std::max(v, oracle::partition_distance(*r.partition, g, h));
    CHECK(v <= 40.0);
    CHECK(r.variation_at_R == doctest::Approx(v).epsilon(1e-12));
    for (Element g = 0; g < 60; ++g) CHECK(oracle::dense(r.glued->witness).row(g).norm() == doctest::Approx(1.0).epsilon(1e-12));
    // The inclusion, recomputed.
    for (const auto& piece : r.pieces)
      for (Element h : piece.preimage) {
        const Element t = *a.group->mul(a.group->inverse(piece.center_element), h);
        CHECK(std::binary_search(r.stabilizer.members.members.begin(), r.stabilizer.members.members.end(), t));
      }
  }
  SUBCASE("halving epsilon breaks the Lebesgue requirement") {
    auto a = isometric(60, 12);
    CHECK_THROWS_AS(group_pipeline(a, arcs(a.space), {0, 1.0, 20.0}, uniform_ball_provider(1.0)), PreconditionError);
  }
  SUBCASE("Z_60 on C_12, perturbed") {
    for (std::uint64_t seed : {3u, 9u}) {
      auto a = perturbed(seed);
      const double c = orbit_map(a, 0).constant;
      const double eps = 2.0 * c * 1.0 * 4.0 * 5.0;
      auto r = group_pipeline(a, arcs(a.space), {0, 1.0, eps}, uniform_ball_provider(1.0));
      CHECK(all_pass(r.checks));
      CHECK(r.stabilizer_threshold == a.A + 2.0 * a.B + a.modulus_at(r.T));
      REQUIRE(r.glued);
      auto iso = group_pipeline(isometric(60, 12), arcs(a.space), {0, 1.0, eps}, uniform_ball_provider(1.0));
      CHECK(r.stabilizer.members.members.size() >= iso.stabilizer.members.members.size());
    }
  }
}

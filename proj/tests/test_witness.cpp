#include "coarse/error.hpp"
#include "coarse/group.hpp"
#include "coarse/witness.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace coarse;

namespace {

double variation_at(const Witness& w, double R) {
  const double r[] = {R};
  return variation_profile(w, r)[0].value;
}

double tail_of(const Witness& w, double S) {
  const double s[] = {S};
  return tail_profile(w, s)[0].value;
}

}  // namespace

TEST_CASE("witness validation") {
  auto X = share(FiniteMetricSpace::path(3));
  std::vector<IndexEntry> index{{std::nullopt, 0}, {std::nullopt, 1}, {std::nullopt, 2}};
  Coefficients v(3);
  v.insert(0) = 0.5;
  std::vector<Coefficients> vectors{v, v, v};
  CHECK_THROWS_AS(Witness(X, index, vectors), InputError);
  std::vector<IndexEntry> stray{{std::nullopt, 0}, {std::nullopt, 7}};
  Coefficients u(2);
  u.insert(0) = 1.0;
  CHECK_THROWS_AS(Witness(X, stray, {u, u, u}), InputError);
}

TEST_CASE("dirac witness") {
  auto P5 = share(FiniteMetricSpace::path(5));
  auto w = dirac_witness(P5);
  for (Point x = 0; x < 5; ++x) CHECK(w.at(x).norm() == 1.0);
  for (double S : {0.0, 1.0, 3.0}) CHECK(tail_of(w, S) == 0.0);
  CHECK(variation_at(w, 1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(variation_at(w, 4.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(variation_at(w, 0.0) == 0.0);
}

TEST_CASE("constant witness has zero variation") {
  auto X = share(FiniteMetricSpace::cycle(5));
  std::vector<IndexEntry> index;
  for (Point x = 0; x < 5; ++x) index.push_back({std::nullopt, x});
  Coefficients v(5);
  v.insert(1) = 0.6;
  v.insert(3) = 0.8;
  Witness w(X, index, std::vector<Coefficients>(5, v));
  for (double R : {0.0, 1.0, 2.0}) CHECK(variation_at(w, R) == 0.0);
}

TEST_CASE("uniform ball witness on [0,10]") {
  auto Z = share(FiniteMetricSpace::z_interval(0, 10));
  auto w = uniform_ball_witness(Z, 1.0);
  const double v = variation_at(w, 1.0);
  CHECK(v > 0.0);
  CHECK(v < std::sqrt(2.0));
  CHECK(std::abs(v - oracle::variation(w, 1.0)) <= 1e-12);
  CHECK(tail_of(w, 0.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(tail_of(w, 1.0) == 0.0);
}

TEST_CASE("equi profiles") {
  auto Z = share(FiniteMetricSpace::z_interval(0, 10));
  const double radii[] = {1.0, 2.0};
  const double scales[] = {0.0, 1.0};
  auto one = uniform_ball_witness(Z, 1.0);
  auto two = uniform_ball_witness(Z, 2.0);
  SUBCASE("single member") {
    auto e = equi_profiles(WitnessFamily{{one}}, radii, scales);
    auto v = variation_profile(one, radii);
    auto t = tail_profile(one, scales);
    for (int i = 0; i < 2; ++i) {
      CHECK(e.variation[i].value == v[i].value);
      CHECK(e.tail[i].value == t[i].value);
    }
  }
  SUBCASE("dirac family has no tail") {
    auto e = equi_profiles(WitnessFamily{{dirac_witness(Z), dirac_witness(share(FiniteMetricSpace::cycle(4)))}},
                           radii, scales);
    for (const auto& s : e.tail) CHECK(s.value == 0.0);
  }
  SUBCASE("radius 1 and radius 2 balls") {
    auto e = equi_profiles(WitnessFamily{{one, two}}, radii, scales);
    auto t2 = tail_profile(two, scales);
    for (int i = 0; i < 2; ++i) CHECK(e.tail[i].value == t2[i].value);
    CHECK(e.tail[0].value == doctest::Approx(0.8));
    CHECK(e.tail[1].value == doctest::Approx(0.4));
  }
  SUBCASE("tails merge even without variation radii") {
    auto e = equi_profiles(WitnessFamily{{two, one}}, {}, scales);
    CHECK(e.variation.empty());
    CHECK(e.tail[0].value == doctest::Approx(0.8));
  }
  SUBCASE("empty family") { CHECK_THROWS_AS(equi_profiles(WitnessFamily{}, radii, scales), InputError); }
}

TEST_CASE("collapse") {
  auto P3 = share(FiniteMetricSpace::path(3));
  SUBCASE("distinct tags behave like absolute values") {
    std::vector<IndexEntry> index{{0, 0}, {1, 1}, {2, 2}};
    Coefficients v(3);
    v.insert(0) = -0.6;
    v.insert(2) = 0.8;
    Witness w(P3, index, {v, v, v});
    auto eta = collapse(w);
    CHECK_FALSE(eta.tagged());
    for (Point x = 0; x < 3; ++x) {
      CHECK(eta.at(x).coeff(0) == doctest::Approx(0.6));
      CHECK(eta.at(x).coeff(2) == doctest::Approx(0.8));
    }
    const double s[] = {0.0, 1.0};
    auto a = tail_profile(w, s);
    auto b = tail_profile(eta, s);
    for (int i = 0; i < 2; ++i) CHECK(a[i].value == doctest::Approx(b[i].value).epsilon(1e-15));
  }
  SUBCASE("mass on one projected point") {
    std::vector<IndexEntry> index{{0, 1}, {5, 1}};
    Coefficients v(2);
    v.insert(0) = std::sqrt(0.5);
    v.insert(1) = -std::sqrt(0.5);
    Witness w(P3, index, {v, v, v});
    auto eta = collapse(w);
    REQUIRE(eta.index().size() == 1);
    CHECK(eta.entry(0).at == 1);
    for (Point x = 0; x < 3; ++x) {
      CHECK(eta.at(x).nonZeros() == 1);
      CHECK(eta.at(x).coeff(0) == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
  SUBCASE("bare index is rejected") { CHECK_THROWS_AS(collapse(dirac_witness(P3)), InputError); }
}

TEST_CASE("transport") {
  SUBCASE("identity") {
    auto X = share(FiniteMetricSpace::cycle(5));
    auto w = uniform_ball_witness(X, 1.0);
    const std::vector<Point> id{0, 1, 2, 3, 4};
    auto t = transport(w, X, id);
    for (Point x = 0; x < 5; ++x) CHECK((t.at(x) - w.at(x)).norm() == 0.0);
  }
  SUBCASE("rotating C_6 by 2 keeps the dirac witness") {
    auto C6 = share(FiniteMetricSpace::cycle(6));
    auto w = dirac_witness(C6);
    std::vector<Point> rot;
    for (Point x = 0; x < 6; ++x) rot.push_back((x + 2) % 6);
    auto t = transport(w, C6, rot);
    for (Point x = 0; x < 6; ++x) {
      CHECK(t.at(x).nonZeros() == 1);
      const Eigen::Index k = Coefficients::InnerIterator(t.at(x), 0).index();
      CHECK(t.entry(k).at == x);
    }
  }
  SUBCASE("left translation on Z_6") {
    auto G = GroupModel::cyclic(6);
    auto X = word_metric_space(G);
    auto w = uniform_ball_witness(X, 1.0);
    const std::vector<double> grid{0.0, 1.0, 2.0, 3.0};
    for (Element g = 0; g < G.size(); ++g) {
      std::vector<Point> left;
      for (Element h = 0; h < G.size(); ++h) left.push_back(*G.mul(g, h));
      auto t = transport(w, X, left);
      auto v0 = variation_profile(w, grid);
      auto v1 = variation_profile(t, grid);
      auto t0 = tail_profile(w, grid);
      auto t1 = tail_profile(t, grid);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(v0[i].value == doctest::Approx(v1[i].value).epsilon(1e-15));
        CHECK(t0[i].value == doctest::Approx(t1[i].value).epsilon(1e-15));
      }
    }
  }
  SUBCASE("non-isometries are rejected") {
    auto P3 = share(FiniteMetricSpace::path(3));
    const std::vector<Point> swap{1, 0, 2};
    CHECK_THROWS_AS(transport(dirac_witness(P3), P3, swap), PreconditionError);
  }
}

TEST_CASE("property: sparse profiles match the dense double loop on |X| <= 60") {
  oracle::Rng rng(47);
  for (int trial = 0; trial < 60; ++trial) {
    auto X = oracle::random_space(rng, rng.uniform(1, 60));
    auto w = oracle::random_witness(rng, X, rng.coin());
    const auto grid = X->distance_values();
    auto v = variation_profile(w, grid);
    auto t = tail_profile(w, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(std::abs(v[i].value - oracle::variation(w, grid[i])) <= 1e-12);
      CHECK(std::abs(t[i].value - oracle::tail(w, grid[i])) <= 1e-12);
    }
  }
}

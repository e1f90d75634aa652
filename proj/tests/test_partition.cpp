#include "coarse/error.hpp"
#include "coarse/partition.hpp"
#include "oracle.hpp"

#include <doctest.h>

using namespace coarse;

namespace {

SpacePtr P5() { return share(FiniteMetricSpace::path(5)); }

// First coordinate of an "a,b" id.
int first_coordinate(const std::string& id) { return std::stoi(id.substr(0, id.find(','))); }

}  // namespace

TEST_CASE("partition validation") {
  auto X = P5();
  Cover c(X, {{0, 1, 2}, {2, 3, 4}});
  PartitionValues bad(2, 5);
  bad.insert(0, 0) = 1.0;
  CHECK_THROWS_AS(PartitionOfUnity(c, bad), InputError);
  PartitionValues outside(2, 5);
  for (Point x = 0; x < 5; ++x) outside.insert(0, x) = 1.0;
  CHECK_THROWS_AS(PartitionOfUnity(c, outside), InputError);
}

TEST_CASE("Bell partition of a single piece is constant") {
  auto X = P5();
  auto b = bell_partition(Cover(X, {all_points(*X)}));
  for (Point x = 0; x < 5; ++x) CHECK(b.partition.value(0, x) == 1.0);
  for (double R : {0.0, 1.0, 4.0}) CHECK(partition_variation(b.partition, R).value == 0.0);
}

TEST_CASE("Bell weights on P_5") {
  auto X = P5();
  Cover c(X, {{0, 1, 2}, {2, 3, 4}});
  auto phi = bell_weights(c);
  CHECK(phi.value(0, 0) == 1.0);
  CHECK(phi.value(0, 2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(phi.value(0, 4) == 0.0);
  auto v = partition_variation(phi, 1.0);
  CHECK(v.value == doctest::Approx(1.0).epsilon(1e-15));
  double adjacent = 0.0;
  for (Point x = 0; x + 1 < 5; ++x) adjacent = std::max(adjacent, oracle::partition_distance(phi, x, x + 1));
  CHECK(adjacent == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(oracle::partition_distance(phi, 1, 2) == doctest::Approx(1.0));
  CHECK(oracle::partition_distance(phi, 2, 3) == doctest::Approx(1.0));
  // Zero Lebesgue number: the certified constructor refuses.
  CHECK_THROWS_AS(bell_partition(c), PreconditionError);
}

TEST_CASE("Bell constant") {
  CHECK(bell_constant(1, 100.0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(bell_constant(0, 1.0) == 6.0);
}

TEST_CASE("variation below the uniform discreteness only sees diagonal pairs") {
  auto X = P5();
  auto phi = bell_weights(Cover(X, {{0, 1, 2}, {2, 3, 4}}));
  CHECK(partition_variation(phi, 0.5).value == 0.0);
}

TEST_CASE("pullback") {
  auto X = P5();
  auto b = bell_partition(Cover(X, {{0, 1, 2, 3}, {2, 3, 4}}));
  SUBCASE("identity") {
    auto f = check_coarse_map(X, X, {0, 1, 2, 3, 4}, X->distance_values());
    auto pb = pullback_partition(f, b.partition);
    CHECK(Eigen::MatrixXd(pb.partition.values()) == Eigen::MatrixXd(b.partition.values()));
  }
  SUBCASE("constant") {
    auto f = check_coarse_map(X, X, {3, 3, 3, 3, 3}, X->distance_values());
    auto pb = pullback_partition(f, b.partition);
    for (int j = 0; j < pb.partition.cover().size(); ++j)
      for (Point x = 0; x < 5; ++x)
        CHECK(pb.partition.value(j, x) == b.partition.value(pb.source_piece[static_cast<std::size_t>(j)], 3));
  }
  SUBCASE("l1 ball of radius 6 projected onto an interval") {
    auto ball = oracle::l1_ball(6);
    auto Z = share(FiniteMetricSpace::z_interval(-6, 6));
    std::vector<Point> proj;
    for (Point x = 0; x < ball->size(); ++x) proj.push_back(*Z->find(std::to_string(first_coordinate(ball->id(x)))));
    auto f = check_coarse_map(ball, Z, proj, ball->distance_values());
    PointSet left, right;
    for (Point z = 0; z < Z->size(); ++z) {
      if (z <= 8) left.push_back(z);
      if (z >= 4) right.push_back(z);
    }
    auto target = bell_partition(Cover(Z, {left, right}));
    auto pb = pullback_partition(f, target.partition);
    for (double R : {1.0, 2.0, 3.0, 5.0}) {
      double pulled = 0.0;
      for (Point x = 0; x < ball->size(); ++x)
        for (Point y = 0; y < ball->size(); ++y)
          if (ball->d(x, y) <= R) pulled = std::max(pulled, oracle::partition_distance(pb.partition, x, y));
      CHECK(pulled <= partition_variation(target.partition, f.modulus_at(R)).value + 1e-12);
      CHECK(partition_variation(pb.partition, R).value == doctest::Approx(pulled).epsilon(1e-12));
    }
  }
}

TEST_CASE("property: Bell bound, pullback domination and oracle agreement") {
  oracle::Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    auto X = oracle::random_space(rng, rng.uniform(3, 40));
    Cover c = oracle::random_cover(rng, X, rng.uniform(1, 5));
    auto phi = bell_weights(c);
    for (Point x = 0; x < X->size(); ++x) CHECK(phi.at(x).sum() == doctest::Approx(1.0).epsilon(1e-12));
    const double R = rng.uniform(0, 4);
    double v = 0.0;
    for (Point x = 0; x < X->size(); ++x)
      for (Point y = 0; y < X->size(); ++y)
        if (X->d(x, y) <= R) v = std::max(v, oracle::partition_distance(phi, x, y));
    CHECK(std::abs(partition_variation(phi, R).value - v) <= 1e-12);
    if (lebesgue_number(c).value > 0.0) {
      auto b = bell_partition(c);
      for (Point x = 0; x < X->size(); ++x)
        for (Point y = x + 1; y < X->size(); ++y)
          CHECK(oracle::partition_distance(b.partition, x, y) <= b.lipschitz_bound * X->d(x, y) + 1e-12);
    }
    // Pullback along a random map into X from a random source.
    auto S = oracle::random_space(rng, rng.uniform(2, 30));
    std::vector<Point> assignment;
    for (Point s = 0; s < S->size(); ++s) assignment.push_back(rng.uniform(0, X->size() - 1));
    auto f = check_coarse_map(S, X, assignment, S->distance_values());
    auto pb = pullback_partition(f, phi);
    for (double r : S->distance_values()) {
      double pulled = 0.0;
      for (Point a = 0; a < S->size(); ++a)
        for (Point b2 = 0; b2 < S->size(); ++b2)
          if (S->d(a, b2) <= r) pulled = std::max(pulled, oracle::partition_distance(pb.partition, a, b2));
      CHECK(pulled <= partition_variation(phi, f.modulus_at(r)).value + 1e-12);
    }
  }
}

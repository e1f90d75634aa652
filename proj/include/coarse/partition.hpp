#pragma once

#include "coarse/cover.hpp"
#include "coarse/space.hpp"

#include <Eigen/SparseCore>

#include <vector>

namespace coarse {

/// Pieces x points, stored only where positive.
using PartitionValues = Eigen::SparseMatrix<double>;

/// Functions phi_i : X -> [0, 1] summing to one, each vanishing outside U_i.
class PartitionOfUnity {
 public:
  /// Throws InputError when a column does not sum to 1 (within 1e-9), a value
  /// leaves [0, 1], or a positive value sits outside its piece.
  PartitionOfUnity(Cover cover, PartitionValues values);

  const Cover& cover() const { return cover_; }
  const FiniteMetricSpace& space() const { return cover_.space(); }
  const PartitionValues& values() const { return values_; }
  double value(int piece, Point x) const { return values_.coeff(piece, x); }
  /// Column of all piece values at x.
  Eigen::VectorXd at(Point x) const { return values_.col(x); }

 private:
  Cover cover_;
  PartitionValues values_;
};

/// The raw formula phi_i(x) = d(x, X \ U_i) / sum_j d(x, X \ U_j), with
/// d(x, empty) taken as diameter + 1. No Lebesgue-number requirement.
PartitionOfUnity bell_weights(const Cover& cover);

struct BellPartition {
  PartitionOfUnity partition;
  int multiplicity = 0;
  double lebesgue = 0.0;
  /// (2k + 2)(2k + 3) / L with k the multiplicity and L the Lebesgue number.
  double lipschitz_bound = 0.0;
  double min_denominator = 0.0;
};

/// Bell's partition with its certified Lipschitz constant. Throws
/// PreconditionError when the Lebesgue number is 0 (the bound would be vacuous).
BellPartition bell_partition(const Cover& cover);

inline double bell_constant(int k, double L) { return (2.0 * k + 2.0) * (2.0 * k + 3.0) / L; }

struct PulledBackPartition {
  /// Subordinated to the nonempty preimages f^{-1}(U_i).
  PartitionOfUnity partition;
  /// Piece of the pulled-back cover -> piece of the original cover.
  std::vector<int> source_piece;
};

PulledBackPartition pullback_partition(const CoarseMapCert& f, const PartitionOfUnity& on_target);

/// Maximum of some pair functional, with the pair attaining it.
struct PairMax {
  double value = 0.0;
  Point x = -1;
  Point y = -1;
};

/// sum_i |phi_i(x) - phi_i(y)|.
double partition_distance(const PartitionOfUnity& p, Point x, Point y);
/// Max of partition_distance over pairs with d(x, y) <= R.
PairMax partition_variation(const PartitionOfUnity& p, double R);
/// Max of partition_distance(x, y) / d(x, y) over distinct pairs.
PairMax partition_lipschitz_ratio(const PartitionOfUnity& p);

}  // namespace coarse

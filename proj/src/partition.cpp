#include "coarse/partition.hpp"

#include "coarse/error.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace coarse {

namespace {
constexpr double kValueSlack = 1e-12;
}  // namespace

PartitionOfUnity::PartitionOfUnity(Cover cover, PartitionValues values)
    : cover_(std::move(cover)), values_(std::move(values)) {
  const int n = cover_.space().size();
  if (values_.rows() != cover_.size() || values_.cols() != n)
    throw InputError("partition table shape does not match the cover");
  values_.prune(0.0);
  values_.makeCompressed();
  for (Point x = 0; x < n; ++x) {
    double total = 0.0;
    for (PartitionValues::InnerIterator it(values_, x); it; ++it) {
      const auto piece = static_cast<int>(it.row());
      if (it.value() < 0.0 || it.value() > 1.0 + kValueSlack) {
        std::ostringstream msg;
        msg << "partition value " << it.value() << " outside [0, 1] at piece " << piece << ", point '"
            << cover_.space().id(x) << "'";
        throw InputError(msg.str());
      }
      if (!cover_.contains(piece, x)) {
        throw InputError("partition is not subordinated: piece " + std::to_string(piece) +
                         " is positive at '" + cover_.space().id(x) + "' outside the piece");
      }
      total += it.value();
    }
    if (std::abs(total - 1.0) > 1e-9) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "partition sums to " << total << " at point '" << cover_.space().id(x) << "'";
      throw InputError(msg.str());
    }
  }
}

namespace {

// d(x, X \ U) for x in U; the complement of a whole-space piece is empty and
// its distance is replaced by diameter + 1.
Eigen::MatrixXd complement_distances(const Cover& cover) {
  const auto& space = cover.space();
  const int n = space.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(cover.size(), n);
  for (int i = 0; i < cover.size(); ++i) {
    const PointSet outside = set_difference(all_points(space), cover.piece(i));
    for (Point x : cover.piece(i))
      out(i, x) = outside.empty() ? space.diameter() + 1.0 : dist_to_set(space, x, outside);
  }
  return out;
}

PartitionOfUnity normalize_columns(const Cover& cover, const Eigen::MatrixXd& weights) {
  std::vector<Eigen::Triplet<double>> entries;
  for (Eigen::Index x = 0; x < weights.cols(); ++x) {
    const double total = weights.col(x).sum();
    for (Eigen::Index i = 0; i < weights.rows(); ++i)
      if (weights(i, x) > 0.0) entries.emplace_back(i, x, weights(i, x) / total);
  }
  PartitionValues values(weights.rows(), weights.cols());
  values.setFromTriplets(entries.begin(), entries.end());
  return PartitionOfUnity(cover, std::move(values));
}

}  // namespace

PartitionOfUnity bell_weights(const Cover& cover) {
  return normalize_columns(cover, complement_distances(cover));
}

BellPartition bell_partition(const Cover& cover) {
  const auto lebesgue = lebesgue_number(cover);
  if (!(lebesgue.value > 0.0)) {
    throw PreconditionError("Lebesgue number 0 < required positive value: the Lipschitz bound would be vacuous");
  }
  const Eigen::MatrixXd weights = complement_distances(cover);
  const double min_denominator = weights.colwise().sum().minCoeff();
  if (min_denominator < lebesgue.value) {
    throw std::logic_error("Bell denominator below the Lebesgue number");
  }
  const int k = multiplicity(cover);
  return BellPartition{normalize_columns(cover, weights), k, lebesgue.value,
                       bell_constant(k, lebesgue.value), min_denominator};
}

PulledBackPartition pullback_partition(const CoarseMapCert& f, const PartitionOfUnity& on_target) {
  const auto& target_cover = on_target.cover();
  if (f.target->size() != target_cover.space().size())
    throw InputError("map target differs from the partition's space");
  const int n = f.source->size();
  std::vector<PointSet> pieces;
  std::vector<int> source_piece;
  for (int i = 0; i < target_cover.size(); ++i) {
    PointSet pre;
    for (Point x = 0; x < n; ++x)
      if (target_cover.contains(i, f(x))) pre.push_back(x);
    if (pre.empty()) continue;
    pieces.push_back(std::move(pre));
    source_piece.push_back(i);
  }
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t j = 0; j < source_piece.size(); ++j)
    for (Point x : pieces[j]) {
      const double v = on_target.value(source_piece[j], f(x));
      if (v > 0.0) entries.emplace_back(static_cast<int>(j), x, v);
    }
  PartitionValues values(static_cast<Eigen::Index>(pieces.size()), n);
  values.setFromTriplets(entries.begin(), entries.end());
  return PulledBackPartition{PartitionOfUnity(Cover(f.source, std::move(pieces)), std::move(values)),
                             std::move(source_piece)};
}

double partition_distance(const PartitionOfUnity& p, Point x, Point y) {
  return (p.values().col(x) - p.values().col(y)).cwiseAbs().sum();
}

PairMax partition_variation(const PartitionOfUnity& p, double R) {
  PairMax best;
  const auto& space = p.space();
  for (Point x = 0; x < space.size(); ++x)
    for (Point y = x; y < space.size(); ++y) {
      if (space.d(x, y) > R) continue;
      const double v = partition_distance(p, x, y);
      if (best.x < 0 || v > best.value) best = {v, x, y};
    }
  return best;
}

PairMax partition_lipschitz_ratio(const PartitionOfUnity& p) {
  PairMax best;
  const auto& space = p.space();
  for (Point x = 0; x < space.size(); ++x)
    for (Point y = x + 1; y < space.size(); ++y) {
      const double v = partition_distance(p, x, y) / space.d(x, y);
      if (best.x < 0 || v > best.value) best = {v, x, y};
    }
  return best;
}

}  // namespace coarse

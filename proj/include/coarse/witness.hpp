#pragma once

#include "coarse/space.hpp"

#include <Eigen/SparseCore>

#include <compare>
#include <optional>
#include <span>
#include <vector>

namespace coarse {

/// A coordinate of the sequence space: a bare point of X, or a tagged copy of
/// one. Tails are always measured through `at`.
struct IndexEntry {
  std::optional<long> tag;
  Point at = 0;

  friend auto operator<=>(const IndexEntry&, const IndexEntry&) = default;
  friend bool operator==(const IndexEntry&, const IndexEntry&) = default;
};

using Coefficients = Eigen::SparseVector<double>;

/// Per-point unit vectors x -> xi_x over a shared index.
class Witness {
 public:
  /// Throws InputError on a malformed index, a missing vector, or a vector
  /// whose norm differs from 1 by more than 1e-9.
  Witness(SpacePtr space, std::vector<IndexEntry> index, std::vector<Coefficients> vectors);

  const FiniteMetricSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  const std::vector<IndexEntry>& index() const { return index_; }
  const IndexEntry& entry(Eigen::Index k) const { return index_[static_cast<std::size_t>(k)]; }
  const Coefficients& at(Point x) const { return vectors_[static_cast<std::size_t>(x)]; }
  const std::vector<Coefficients>& vectors() const { return vectors_; }
  bool tagged() const;

 private:
  SpacePtr space_;
  std::vector<IndexEntry> index_;
  std::vector<Coefficients> vectors_;
};

struct WitnessFamily {
  std::vector<Witness> members;
};

/// One profile sample; (x, y) is the maximizing pair (x alone for tails).
struct ProfileSample {
  double scale = 0.0;
  double value = 0.0;
  Point x = -1;
  Point y = -1;
};

/// Samples in the caller's scale order.
using Profile = std::vector<ProfileSample>;

/// Unit mass at each point's own coordinate.
Witness dirac_witness(const SpacePtr& space);
/// Uniform unit vector on B(x, radius).
Witness uniform_ball_witness(const SpacePtr& space, double radius);

/// ||xi_x - xi_y||.
double witness_distance(const Witness& w, Point x, Point y);
/// Squared mass of xi_x on coordinates projecting outside B(x, S).
double tail_at(const Witness& w, Point x, double S);

/// Per R: max ||xi_x - xi_y|| over d(x, y) <= R.
Profile variation_profile(const Witness& w, std::span<const double> radii);
/// Per S: max over x of tail_at(x, S).
Profile tail_profile(const Witness& w, std::span<const double> scales);

struct EquiProfiles {
  Profile variation;
  Profile tail;
};

/// Pointwise maximum of the member profiles. Throws InputError on an empty family.
EquiProfiles equi_profiles(const WitnessFamily& family, std::span<const double> radii,
                           std::span<const double> scales);

/// eta_x(t) = sqrt of the squared mass of xi_x on coordinates projecting to t.
/// Throws InputError for a bare-index witness.
Witness collapse(const Witness& w);

/// xi'_{g(x)}(tag, g(w)) = xi_x(tag, w) along a bijective isometry g : X -> X'.
/// Throws PreconditionError when g is not a bijective isometry.
Witness transport(const Witness& w, const SpacePtr& target, std::span<const Point> map);

}  // namespace coarse

#pragma once

#include <Eigen/Dense>

#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace coarse {

/// Position of a point in its space's stored order.
using Point = int;
/// Sorted, duplicate-free list of points.
using PointSet = std::vector<Point>;
using DistanceMatrix = Eigen::MatrixXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class GridNorm { l1, linf };

// Layout hints recorded by the structured builders. Cover search uses them.
struct GeneralLayout {};
struct IntervalLayout {
  long lo = 0;
};
struct CycleLayout {
  int n = 0;
};
struct GridLayout {
  std::vector<int> dims;
  GridNorm norm = GridNorm::l1;
};
using Layout = std::variant<GeneralLayout, IntervalLayout, CycleLayout, GridLayout>;

/// A finite set of labelled points with a validated metric.
///
/// Points are addressed by their position (`Point`) in the stored order; the
/// opaque string ids are kept for I/O and diagnostics. Distance ties are
/// always broken toward the smaller position.
class FiniteMetricSpace {
 public:
  /// Validates the metric axioms (exhaustive triple check up to 300 points,
  /// seeded random sampling above) and throws MetricError on violation.
  static FiniteMetricSpace from_matrix(std::vector<std::string> ids, DistanceMatrix d);
  /// Shortest-path metric of an undirected graph. Throws InputError when
  /// the graph is disconnected.
  static FiniteMetricSpace from_graph(std::vector<std::string> ids,
                                      std::span<const std::pair<Point, Point>> edges);

  static FiniteMetricSpace z_interval(long lo, long hi);
  static FiniteMetricSpace path(int n) { return z_interval(0, n - 1); }
  static FiniteMetricSpace cycle(int n);
  static FiniteMetricSpace grid(std::vector<int> dims, GridNorm norm);

  int size() const { return static_cast<int>(ids_.size()); }
  double d(Point x, Point y) const { return dist_(x, y); }
  const DistanceMatrix& distances() const { return dist_; }

  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(Point x) const { return ids_[static_cast<std::size_t>(x)]; }
  std::optional<Point> find(std::string_view id) const;
  /// Throws InputError for an unknown id.
  Point index_of(std::string_view id) const;
  bool contains(Point x) const { return x >= 0 && x < size(); }

  /// Minimum distance between distinct points; +inf for a one-point space.
  double uniform_discreteness() const { return min_distance_; }
  double diameter() const { return diameter_; }
  /// max_x |B(x, R)|.
  int max_ball_size(double radius) const;
  /// Sorted distinct realized distances, starting with 0.
  const std::vector<double>& distance_values() const { return distance_values_; }

  const Layout& layout() const { return layout_; }
  /// Replaces the recorded layout; the metric is untouched.
  FiniteMetricSpace with_layout(Layout layout) const;

 private:
  FiniteMetricSpace(std::vector<std::string> ids, DistanceMatrix d, Layout layout);
  friend FiniteMetricSpace restrict_to(const FiniteMetricSpace&, std::span<const Point>);

  std::vector<std::string> ids_;
  DistanceMatrix dist_;
  Layout layout_;
  std::unordered_map<std::string, Point> lookup_;
  std::vector<double> distance_values_;
  double min_distance_ = kInfinity;
  double diameter_ = 0.0;
};

using SpacePtr = std::shared_ptr<const FiniteMetricSpace>;

inline SpacePtr share(FiniteMetricSpace space) {
  return std::make_shared<const FiniteMetricSpace>(std::move(space));
}

/// Throws MetricError naming the first offending pair or triple.
void check_metric_axioms(const std::vector<std::string>& ids, const DistanceMatrix& d);

/// Closed ball {w : d(center, w) <= radius}.
PointSet ball(const FiniteMetricSpace& space, Point center, double radius);
/// {w : d(w, set) <= radius}.
PointSet neighborhood(const FiniteMetricSpace& space, std::span<const Point> set,
                      double radius);

double dist_to_set(const FiniteMetricSpace& space, Point x, std::span<const Point> set);
/// Nearest member of `set`; ties go to the smallest position.
Point nearest_point(const FiniteMetricSpace& space, Point x, std::span<const Point> set);
bool is_c_net(const FiniteMetricSpace& space, std::span<const Point> set, double c);

double set_distance(const FiniteMetricSpace& space, std::span<const Point> a,
                    std::span<const Point> b);
double set_diameter(const FiniteMetricSpace& space, std::span<const Point> set);

PointSet normalized(PointSet set);
PointSet all_points(const FiniteMetricSpace& space);
bool is_subset(std::span<const Point> a, std::span<const Point> b);
PointSet set_difference(std::span<const Point> a, std::span<const Point> b);

/// Induced metric on `members`, keeping the parent's ids and order.
FiniteMetricSpace restrict_to(const FiniteMetricSpace& parent, std::span<const Point> members);

/// A subset of a parent space carrying the restricted metric.
struct SubspaceRef {
  SpacePtr parent;
  PointSet members;

  SubspaceRef(SpacePtr parent, PointSet members);
  /// Standalone space; local position i corresponds to members[i].
  SpacePtr materialize() const;
  std::optional<Point> local_index(Point parent_point) const;
};

/// Certified bornologous map between finite spaces.
struct CoarseMapCert {
  SpacePtr source;
  SpacePtr target;
  std::vector<Point> assignment;
  /// Ascending sampled radii and the minimal modulus at each.
  std::vector<double> radii;
  std::vector<double> modulus;
  /// Source pair attaining modulus[i]; (-1, -1) when no pair lies within radii[i].
  std::vector<std::pair<Point, Point>> attained_by;
  /// Largest image distance over all pairs; bounds the modulus beyond the grid.
  double global_bound = 0.0;
  std::string properness_note;

  Point operator()(Point x) const { return assignment[static_cast<std::size_t>(x)]; }
  /// Step extension: value at the first sample >= r.
  double modulus_at(double r) const;
};

CoarseMapCert check_coarse_map(SpacePtr source, SpacePtr target, std::vector<Point> assignment,
                               std::vector<double> sampled_radii);

}  // namespace coarse

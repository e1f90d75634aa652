#include "coarse/space.hpp"

#include "coarse/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <sstream>

namespace coarse {

namespace {

constexpr int kExhaustiveTripleLimit = 300;
constexpr std::size_t kSampledTriples = 2'000'000;

std::string join_ids(std::initializer_list<std::string_view> parts) {
  std::string out = "(";
  bool first = true;
  for (auto p : parts) {
    if (!first) out += ", ";
    out += p;
    first = false;
  }
  return out + ")";
}

}  // namespace

void check_metric_axioms(const std::vector<std::string>& ids, const DistanceMatrix& d) {
  const auto n = static_cast<Eigen::Index>(ids.size());
  if (d.rows() != n || d.cols() != n) {
    std::ostringstream msg;
    msg << "distance table is " << d.rows() << "x" << d.cols() << " but there are " << n
        << " points";
    throw MetricError(msg.str());
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d(i, i) != 0.0)
      throw MetricError("nonzero self-distance at " + ids[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& a = ids[static_cast<std::size_t>(i)];
      const auto& b = ids[static_cast<std::size_t>(j)];
      if (!std::isfinite(d(i, j)))
        throw MetricError("non-finite distance at pair " + join_ids({a, b}));
      if (i != j && !(d(i, j) > 0.0))
        throw MetricError("non-positive distance between distinct points " + join_ids({a, b}));
      if (d(i, j) != d(j, i)) throw MetricError("asymmetric distance at pair " + join_ids({a, b}));
    }
  }
  auto check_triple = [&](Eigen::Index x, Eigen::Index y, Eigen::Index z) {
    if (d(x, z) > d(x, y) + d(y, z) + 1e-9 * (1.0 + d(x, z))) {
      throw MetricError("triangle inequality fails for triple " +
                        join_ids({ids[static_cast<std::size_t>(x)], ids[static_cast<std::size_t>(y)],
                                  ids[static_cast<std::size_t>(z)]}));
    }
  };
  if (n <= kExhaustiveTripleLimit) {
    for (Eigen::Index x = 0; x < n; ++x)
      for (Eigen::Index y = 0; y < n; ++y)
        for (Eigen::Index z = 0; z < n; ++z) check_triple(x, y, z);
  } else {
    std::mt19937_64 rng(0x5eedc0a75eULL);
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    for (std::size_t t = 0; t < kSampledTriples; ++t) check_triple(pick(rng), pick(rng), pick(rng));
  }
}

FiniteMetricSpace::FiniteMetricSpace(std::vector<std::string> ids, DistanceMatrix d, Layout layout)
    : ids_(std::move(ids)), dist_(std::move(d)), layout_(std::move(layout)) {
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!lookup_.emplace(ids_[i], static_cast<Point>(i)).second)
      throw InputError("duplicate point id '" + ids_[i] + "'");
  }
  if (ids_.empty()) throw InputError("a metric space needs at least one point");
  std::vector<double> values(dist_.data(), dist_.data() + dist_.size());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  distance_values_ = std::move(values);
  diameter_ = distance_values_.back();
  min_distance_ = distance_values_.size() > 1 ? distance_values_[1] : kInfinity;
}

FiniteMetricSpace FiniteMetricSpace::from_matrix(std::vector<std::string> ids, DistanceMatrix d) {
  check_metric_axioms(ids, d);
  return FiniteMetricSpace(std::move(ids), std::move(d), GeneralLayout{});
}

FiniteMetricSpace FiniteMetricSpace::from_graph(std::vector<std::string> ids,
                                                std::span<const std::pair<Point, Point>> edges) {
  const int n = static_cast<int>(ids.size());
  std::vector<std::vector<Point>> adjacency(static_cast<std::size_t>(n));
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) throw InputError("edge endpoint out of range");
    if (a == b) continue;
    adjacency[static_cast<std::size_t>(a)].push_back(b);
    adjacency[static_cast<std::size_t>(b)].push_back(a);
  }
  DistanceMatrix d = DistanceMatrix::Constant(n, n, -1.0);
  for (Point s = 0; s < n; ++s) {
    std::deque<Point> queue{s};
    d(s, s) = 0.0;
    while (!queue.empty()) {
      const Point u = queue.front();
      queue.pop_front();
      for (Point v : adjacency[static_cast<std::size_t>(u)]) {
        if (d(s, v) < 0.0) {
          d(s, v) = d(s, u) + 1.0;
          queue.push_back(v);
        }
      }
    }
    for (Point t = 0; t < n; ++t) {
      if (d(s, t) < 0.0) {
        throw InputError("graph is disconnected: no path from '" + ids[static_cast<std::size_t>(s)] +
                         "' to '" + ids[static_cast<std::size_t>(t)] + "'");
      }
    }
  }
  return FiniteMetricSpace(std::move(ids), std::move(d), GeneralLayout{});
}

FiniteMetricSpace FiniteMetricSpace::z_interval(long lo, long hi) {
  if (hi < lo) throw InputError("empty integer interval");
  const auto n = static_cast<Eigen::Index>(hi - lo + 1);
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (long v = lo; v <= hi; ++v) ids.push_back(std::to_string(v));
  DistanceMatrix d(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = static_cast<double>(std::abs(i - j));
  return FiniteMetricSpace(std::move(ids), std::move(d), IntervalLayout{lo});
}

FiniteMetricSpace FiniteMetricSpace::cycle(int n) {
  if (n < 1) throw InputError("cycle needs at least one vertex");
  std::vector<std::string> ids;
  for (int v = 0; v < n; ++v) ids.push_back(std::to_string(v));
  DistanceMatrix d(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int k = std::abs(i - j);
      d(i, j) = std::min(k, n - k);
    }
  return FiniteMetricSpace(std::move(ids), std::move(d), CycleLayout{n});
}

FiniteMetricSpace FiniteMetricSpace::grid(std::vector<int> dims, GridNorm norm) {
  if (dims.empty()) throw InputError("grid needs at least one dimension");
  int n = 1;
  for (int s : dims) {
    if (s < 1) throw InputError("grid dimensions must be positive");
    n *= s;
  }
  auto coords = [&](int index) {
    std::vector<int> c(dims.size());
    for (std::size_t k = dims.size(); k-- > 0;) {
      c[k] = index % dims[k];
      index /= dims[k];
    }
    return c;
  };
  std::vector<std::string> ids;
  std::vector<std::vector<int>> all;
  for (int i = 0; i < n; ++i) {
    auto c = coords(i);
    std::string id;
    for (std::size_t k = 0; k < c.size(); ++k) id += (k ? "," : "") + std::to_string(c[k]);
    ids.push_back(std::move(id));
    all.push_back(std::move(c));
  }
  DistanceMatrix d(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      int acc = 0;
      for (std::size_t k = 0; k < dims.size(); ++k) {
        const int delta = std::abs(all[static_cast<std::size_t>(i)][k] - all[static_cast<std::size_t>(j)][k]);
        acc = norm == GridNorm::l1 ? acc + delta : std::max(acc, delta);
      }
      d(i, j) = acc;
    }
  return FiniteMetricSpace(std::move(ids), std::move(d), GridLayout{std::move(dims), norm});
}

FiniteMetricSpace FiniteMetricSpace::with_layout(Layout layout) const {
  FiniteMetricSpace copy = *this;
  copy.layout_ = std::move(layout);
  return copy;
}

std::optional<Point> FiniteMetricSpace::find(std::string_view id) const {
  auto it = lookup_.find(std::string(id));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

Point FiniteMetricSpace::index_of(std::string_view id) const {
  if (auto p = find(id)) return *p;
  throw InputError("unknown point id '" + std::string(id) + "'");
}

int FiniteMetricSpace::max_ball_size(double radius) const {
  return static_cast<int>((dist_.array() <= radius).rowwise().count().maxCoeff());
}

PointSet ball(const FiniteMetricSpace& space, Point center, double radius) {
  if (!space.contains(center)) throw InputError("ball center outside the space");
  PointSet out;
  for (Point w = 0; w < space.size(); ++w)
    if (space.d(center, w) <= radius) out.push_back(w);
  return out;
}

PointSet neighborhood(const FiniteMetricSpace& space, std::span<const Point> set, double radius) {
  PointSet out;
  if (set.empty()) return out;
  for (Point w = 0; w < space.size(); ++w)
    if (dist_to_set(space, w, set) <= radius) out.push_back(w);
  return out;
}

double dist_to_set(const FiniteMetricSpace& space, Point x, std::span<const Point> set) {
  if (set.empty()) throw InputError("distance to an empty set");
  double best = kInfinity;
  for (Point s : set) best = std::min(best, space.d(x, s));
  return best;
}

Point nearest_point(const FiniteMetricSpace& space, Point x, std::span<const Point> set) {
  if (set.empty()) throw InputError("nearest point in an empty set");
  Point best = set.front();
  for (Point s : set) {
    const double ds = space.d(x, s);
    const double db = space.d(x, best);
    if (ds < db || (ds == db && s < best)) best = s;
  }
  return best;
}

bool is_c_net(const FiniteMetricSpace& space, std::span<const Point> set, double c) {
  if (set.empty()) return false;
  for (Point x = 0; x < space.size(); ++x)
    if (dist_to_set(space, x, set) > c) return false;
  return true;
}

double set_distance(const FiniteMetricSpace& space, std::span<const Point> a,
                    std::span<const Point> b) {
  double best = kInfinity;
  for (Point x : a)
    for (Point y : b) best = std::min(best, space.d(x, y));
  return best;
}

double set_diameter(const FiniteMetricSpace& space, std::span<const Point> set) {
  double best = 0.0;
  for (Point x : set)
    for (Point y : set) best = std::max(best, space.d(x, y));
  return best;
}

PointSet normalized(PointSet set) {
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  return set;
}

PointSet all_points(const FiniteMetricSpace& space) {
  PointSet out(static_cast<std::size_t>(space.size()));
  for (Point x = 0; x < space.size(); ++x) out[static_cast<std::size_t>(x)] = x;
  return out;
}

bool is_subset(std::span<const Point> a, std::span<const Point> b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

PointSet set_difference(std::span<const Point> a, std::span<const Point> b) {
  PointSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

FiniteMetricSpace restrict_to(const FiniteMetricSpace& parent, std::span<const Point> members) {
  if (members.empty()) throw InputError("subspace must be nonempty");
  const auto m = static_cast<Eigen::Index>(members.size());
  std::vector<std::string> ids;
  DistanceMatrix d(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Point p = members[static_cast<std::size_t>(i)];
    if (!parent.contains(p)) throw InputError("subspace member outside the parent space");
    ids.push_back(parent.id(p));
    for (Eigen::Index j = 0; j < m; ++j) d(i, j) = parent.d(p, members[static_cast<std::size_t>(j)]);
  }
  // The restriction of a metric is a metric; skip the axiom check.
  return FiniteMetricSpace(std::move(ids), std::move(d), GeneralLayout{});
}

SubspaceRef::SubspaceRef(SpacePtr p, PointSet m) : parent(std::move(p)), members(normalized(std::move(m))) {
  if (members.empty()) throw InputError("subspace must be nonempty");
  for (Point x : members)
    if (!parent->contains(x)) throw InputError("subspace member outside the parent space");
}

SpacePtr SubspaceRef::materialize() const { return share(restrict_to(*parent, members)); }

std::optional<Point> SubspaceRef::local_index(Point parent_point) const {
  auto it = std::lower_bound(members.begin(), members.end(), parent_point);
  if (it == members.end() || *it != parent_point) return std::nullopt;
  return static_cast<Point>(it - members.begin());
}

double CoarseMapCert::modulus_at(double r) const {
  auto it = std::lower_bound(radii.begin(), radii.end(), r);
  if (it == radii.end()) return global_bound;
  return modulus[static_cast<std::size_t>(it - radii.begin())];
}

CoarseMapCert check_coarse_map(SpacePtr source, SpacePtr target, std::vector<Point> assignment,
                               std::vector<double> sampled_radii) {
  if (static_cast<int>(assignment.size()) != source->size())
    throw InputError("map assignment is not total on the source");
  for (Point y : assignment)
    if (!target->contains(y)) throw InputError("map assignment leaves the target space");
  std::sort(sampled_radii.begin(), sampled_radii.end());
  sampled_radii.erase(std::unique(sampled_radii.begin(), sampled_radii.end()), sampled_radii.end());

  CoarseMapCert cert;
  cert.radii = sampled_radii;
  cert.modulus.assign(sampled_radii.size(), 0.0);
  cert.attained_by.assign(sampled_radii.size(), {-1, -1});
  const int n = source->size();
  for (Point x = 0; x < n; ++x) {
    for (Point y = x; y < n; ++y) {
      const double dx = source->d(x, y);
      const double dy = target->d(assignment[static_cast<std::size_t>(x)], assignment[static_cast<std::size_t>(y)]);
      cert.global_bound = std::max(cert.global_bound, dy);
      auto first = std::lower_bound(sampled_radii.begin(), sampled_radii.end(), dx);
      if (first == sampled_radii.end()) continue;
      const auto k = static_cast<std::size_t>(first - sampled_radii.begin());
      // Attribute the pair to the smallest radius covering it; propagate below.
      if (cert.attained_by[k].first < 0 || dy > cert.modulus[k]) {
        cert.modulus[k] = dy;
        cert.attained_by[k] = {x, y};
      }
    }
  }
  for (std::size_t k = 1; k < cert.modulus.size(); ++k) {
    if (cert.attained_by[k].first < 0 || cert.modulus[k - 1] > cert.modulus[k]) {
      cert.modulus[k] = cert.modulus[k - 1];
      cert.attained_by[k] = cert.attained_by[k - 1];
    }
  }
  cert.source = std::move(source);
  cert.target = std::move(target);
  cert.assignment = std::move(assignment);
  cert.properness_note = "proper: preimages of bounded sets are finite, hence bounded";
  return cert;
}

}  // namespace coarse

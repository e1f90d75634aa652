#include "coarse/witness.hpp"

#include "coarse/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace coarse {

Witness::Witness(SpacePtr space, std::vector<IndexEntry> index, std::vector<Coefficients> vectors)
    : space_(std::move(space)), index_(std::move(index)), vectors_(std::move(vectors)) {
  if (!space_) throw InputError("witness without a space");
  const auto n = static_cast<std::size_t>(space_->size());
  if (vectors_.size() != n) throw InputError("witness must give a vector for every point");
  std::set<IndexEntry> seen;
  for (const auto& e : index_) {
    if (!space_->contains(e.at)) throw InputError("witness index entry projects outside the space");
    if (!seen.insert(e).second) throw InputError("duplicate witness index entry at '" + space_->id(e.at) + "'");
  }
  for (std::size_t x = 0; x < n; ++x) {
    auto& v = vectors_[x];
    if (v.size() != static_cast<Eigen::Index>(index_.size()))
      throw InputError("witness vector length differs from the index size");
    v.prune(0.0);
    const double norm = v.norm();
    if (std::abs(norm - 1.0) > 1e-9) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "witness vector at '" << space_->id(static_cast<Point>(x)) << "' has norm " << norm;
      throw InputError(msg.str());
    }
  }
}

bool Witness::tagged() const {
  return std::any_of(index_.begin(), index_.end(), [](const IndexEntry& e) { return e.tag.has_value(); });
}

namespace {

std::vector<IndexEntry> bare_index(const FiniteMetricSpace& space) {
  std::vector<IndexEntry> index;
  for (Point x = 0; x < space.size(); ++x) index.push_back({std::nullopt, x});
  return index;
}

}  // namespace

Witness dirac_witness(const SpacePtr& space) {
  const int n = space->size();
  std::vector<Coefficients> vectors;
  for (Point x = 0; x < n; ++x) {
    Coefficients v(n);
    v.insert(x) = 1.0;
    vectors.push_back(std::move(v));
  }
  return Witness(space, bare_index(*space), std::move(vectors));
}

Witness uniform_ball_witness(const SpacePtr& space, double radius) {
  const int n = space->size();
  std::vector<Coefficients> vectors;
  for (Point x = 0; x < n; ++x) {
    const PointSet b = ball(*space, x, radius);
    const double c = 1.0 / std::sqrt(static_cast<double>(b.size()));
    Coefficients v(n);
    for (Point w : b) v.insert(w) = c;
    vectors.push_back(std::move(v));
  }
  return Witness(space, bare_index(*space), std::move(vectors));
}

double witness_distance(const Witness& w, Point x, Point y) { return (w.at(x) - w.at(y)).norm(); }

double tail_at(const Witness& w, Point x, double S) {
  double mass = 0.0;
  for (Coefficients::InnerIterator it(w.at(x)); it; ++it)
    if (w.space().d(x, w.entry(it.index()).at) > S) mass += it.value() * it.value();
  return mass;
}

Profile variation_profile(const Witness& w, std::span<const double> radii) {
  struct PairValue {
    double dist;
    double value;
    Point x, y;
  };
  const auto& space = w.space();
  std::vector<PairValue> pairs;
  for (Point x = 0; x < space.size(); ++x)
    for (Point y = x; y < space.size(); ++y) pairs.push_back({space.d(x, y), witness_distance(w, x, y), x, y});
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const PairValue& a, const PairValue& b) { return a.dist < b.dist; });
  // Running maximum over the distance-sorted pairs.
  std::vector<PairValue> running(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    running[i] = pairs[i];
    if (i > 0 && running[i - 1].value >= pairs[i].value) {
      running[i].value = running[i - 1].value;
      running[i].x = running[i - 1].x;
      running[i].y = running[i - 1].y;
    }
  }
  Profile out;
  for (double R : radii) {
    auto it = std::upper_bound(pairs.begin(), pairs.end(), R,
                               [](double r, const PairValue& p) { return r < p.dist; });
    const auto count = static_cast<std::size_t>(it - pairs.begin());
    if (count == 0) {
      out.push_back({R, 0.0, -1, -1});
    } else {
      const auto& best = running[count - 1];
      out.push_back({R, best.value, best.x, best.y});
    }
  }
  return out;
}

Profile tail_profile(const Witness& w, std::span<const double> scales) {
  const auto& space = w.space();
  Profile out;
  for (double S : scales) out.push_back({S, 0.0, -1, -1});
  for (Point x = 0; x < space.size(); ++x) {
    // (distance, squared mass) sorted by distance; suffix sums give every tail at once.
    std::vector<std::pair<double, double>> mass;
    for (Coefficients::InnerIterator it(w.at(x)); it; ++it)
      mass.emplace_back(space.d(x, w.entry(it.index()).at), it.value() * it.value());
    std::sort(mass.begin(), mass.end());
    std::vector<double> suffix(mass.size() + 1, 0.0);
    for (std::size_t i = mass.size(); i-- > 0;) suffix[i] = suffix[i + 1] + mass[i].second;
    for (auto& sample : out) {
      auto it = std::upper_bound(mass.begin(), mass.end(), sample.scale,
                                 [](double s, const std::pair<double, double>& m) { return s < m.first; });
      const double t = suffix[static_cast<std::size_t>(it - mass.begin())];
      if (sample.x < 0 || t > sample.value) {
        sample.value = t;
        sample.x = x;
      }
    }
  }
  return out;
}

EquiProfiles equi_profiles(const WitnessFamily& family, std::span<const double> radii,
                           std::span<const double> scales) {
  if (family.members.empty()) throw InputError("equi-profiles of an empty family");
  EquiProfiles out;
  bool first = true;
  for (const auto& member : family.members) {
    const Profile v = variation_profile(member, radii);
    const Profile t = tail_profile(member, scales);
    if (first) {
      out.variation = v;
      out.tail = t;
      first = false;
      continue;
    }
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i].value > out.variation[i].value) out.variation[i] = v[i];
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i].value > out.tail[i].value) out.tail[i] = t[i];
  }
  return out;
}

Witness collapse(const Witness& w) {
  if (!w.tagged()) throw InputError("collapse needs a tagged index");
  const auto& space = w.space();
  std::map<Point, Eigen::Index> slot;
  for (const auto& e : w.index()) slot.emplace(e.at, 0);
  std::vector<IndexEntry> index;
  for (auto& [at, k] : slot) {
    k = static_cast<Eigen::Index>(index.size());
    index.push_back({std::nullopt, at});
  }
  std::vector<Coefficients> vectors;
  for (Point x = 0; x < space.size(); ++x) {
    Eigen::VectorXd squared = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(index.size()));
    for (Coefficients::InnerIterator it(w.at(x)); it; ++it)
      squared(slot.at(w.entry(it.index()).at)) += it.value() * it.value();
    vectors.push_back(squared.cwiseSqrt().sparseView());
  }
  return Witness(w.space_ptr(), std::move(index), std::move(vectors));
}

Witness transport(const Witness& w, const SpacePtr& target, std::span<const Point> map) {
  const auto& source = w.space();
  const int n = source.size();
  if (static_cast<int>(map.size()) != n || target->size() != n)
    throw PreconditionError("transport map is not a bijection");
  std::vector<Point> inverse(static_cast<std::size_t>(n), -1);
  for (Point x = 0; x < n; ++x) {
    const Point gx = map[static_cast<std::size_t>(x)];
    if (!target->contains(gx) || inverse[static_cast<std::size_t>(gx)] >= 0)
      throw PreconditionError("transport map is not a bijection");
    inverse[static_cast<std::size_t>(gx)] = x;
  }
  for (Point x = 0; x < n; ++x)
    for (Point y = x + 1; y < n; ++y) {
      const Point gx = map[static_cast<std::size_t>(x)];
      const Point gy = map[static_cast<std::size_t>(y)];
      if (source.d(x, y) != target->d(gx, gy)) {
        std::ostringstream msg;
        msg << "transport map is not an isometry: d('" << source.id(x) << "', '" << source.id(y)
            << "') = " << source.d(x, y) << " but the images are at distance " << target->d(gx, gy);
        throw PreconditionError(msg.str());
      }
    }
  // Entry k keeps its position, so coefficient vectors carry over unchanged.
  std::vector<IndexEntry> index;
  for (const auto& e : w.index()) index.push_back({e.tag, map[static_cast<std::size_t>(e.at)]});
  std::vector<Coefficients> vectors;
  for (Point gx = 0; gx < n; ++gx) vectors.push_back(w.at(inverse[static_cast<std::size_t>(gx)]));
  return Witness(target, std::move(index), std::move(vectors));
}

}  // namespace coarse

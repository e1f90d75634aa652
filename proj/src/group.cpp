#include "coarse/group.hpp"

#include "coarse/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <map>
#include <random>
#include <sstream>

namespace coarse {

namespace {

std::string num(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

char invert_letter(char c) {
  return std::islower(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(c))
                                                     : static_cast<char>(std::tolower(c));
}

// Free reduction of the concatenation u v.
std::string reduce(const std::string& u, const std::string& v) {
  std::string out = u;
  for (char c : v) {
    if (!out.empty() && out.back() == invert_letter(c))
      out.pop_back();
    else
      out.push_back(c);
  }
  return out;
}

}  // namespace

GroupModel GroupModel::cyclic(int n) { return product({n}); }

GroupModel GroupModel::product(const std::vector<int>& orders) {
  if (orders.empty()) throw InputError("product group needs at least one factor");
  long total = 1;
  for (int n : orders) {
    if (n < 1) throw InputError("cyclic factor order must be positive");
    total *= n;
    if (total > 20000) throw InputError("group too large for a multiplication table");
  }
  const auto k = orders.size();
  GroupModel g;
  g.coord_count_ = static_cast<int>(k);
  const int size = static_cast<int>(total);
  auto digits = [&](int idx) {
    std::vector<long> out(k);
    for (std::size_t j = k; j-- > 0;) {
      out[j] = idx % orders[j];
      idx /= orders[j];
    }
    return out;
  };
  auto encode = [&](const std::vector<long>& c) {
    long idx = 0;
    for (std::size_t j = 0; j < k; ++j) idx = idx * orders[j] + c[j];
    return static_cast<int>(idx);
  };
  for (int i = 0; i < size; ++i) {
    auto c = digits(i);
    std::string label;
    for (std::size_t j = 0; j < k; ++j) label += (j ? "," : "") + std::to_string(c[j]);
    g.labels_.push_back(label);
    g.coords_.push_back(std::move(c));
  }
  g.mult_.resize(size, size);
  for (int a = 0; a < size; ++a)
    for (int b = 0; b < size; ++b) {
      std::vector<long> c(k);
      for (std::size_t j = 0; j < k; ++j) c[j] = (g.coords_[a][j] + g.coords_[b][j]) % orders[j];
      g.mult_(a, b) = encode(c);
    }
  for (std::size_t j = 0; j < k; ++j) {
    if (orders[j] == 1) continue;
    std::vector<long> up(k, 0), down(k, 0);
    up[j] = 1;
    down[j] = orders[j] - 1;
    g.generators_.push_back(encode(up));
    if (orders[j] > 2) g.generators_.push_back(encode(down));
  }
  std::sort(g.generators_.begin(), g.generators_.end());
  g.identity_ = 0;
  g.finish();
  return g;
}

GroupModel GroupModel::free_ball(const std::vector<char>& letters, int radius) {
  if (letters.empty()) throw InputError("free group needs at least one generator letter");
  if (radius < 0) throw InputError("ball radius must be nonnegative");
  std::vector<char> alphabet;
  for (char c : letters) {
    if (!std::islower(static_cast<unsigned char>(c)))
      throw InputError(std::string("generator '") + c + "' must be a lowercase letter");
    if (std::find(alphabet.begin(), alphabet.end(), c) != alphabet.end())
      throw InputError(std::string("duplicate generator '") + c + "'");
    alphabet.push_back(c);
  }
  std::vector<char> symmetric;
  for (char c : alphabet) {
    symmetric.push_back(c);
    symmetric.push_back(invert_letter(c));
  }

  std::vector<std::string> words{""};
  for (std::size_t start = 0, len = 0; static_cast<int>(len) < radius; ++len) {
    const std::size_t stop = words.size();
    for (std::size_t w = start; w < stop; ++w)
      for (char c : symmetric) {
        if (!words[w].empty() && words[w].back() == invert_letter(c)) continue;
        words.push_back(words[w] + c);
        if (words.size() > 20000) throw InputError("free group ball too large");
      }
    start = stop;
  }
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < words.size(); ++i) index[words[i]] = static_cast<int>(i);

  GroupModel g;
  g.truncation_ = radius;
  g.coord_count_ = static_cast<int>(alphabet.size());
  const int size = static_cast<int>(words.size());
  for (const auto& w : words) {
    g.labels_.push_back(w.empty() ? "e" : w);
    std::vector<long> c(alphabet.size(), 0);
    for (char ch : w) {
      const char lower = static_cast<char>(std::tolower(ch));
      const auto j = static_cast<std::size_t>(std::find(alphabet.begin(), alphabet.end(), lower) - alphabet.begin());
      c[j] += (ch == lower) ? 1 : -1;
    }
    g.coords_.push_back(std::move(c));
  }
  g.mult_.resize(size, size);
  for (int a = 0; a < size; ++a)
    for (int b = 0; b < size; ++b) {
      auto it = index.find(reduce(words[a], words[b]));
      g.mult_(a, b) = it == index.end() ? -1 : it->second;
    }
  if (radius > 0)
    for (char c : symmetric) g.generators_.push_back(index.at(std::string(1, c)));
  std::sort(g.generators_.begin(), g.generators_.end());
  g.identity_ = 0;
  g.finish();
  return g;
}

void GroupModel::finish() {
  const int n = size();
  inverse_.assign(static_cast<std::size_t>(n), -1);
  for (Element a = 0; a < n; ++a)
    for (Element b = 0; b < n; ++b)
      if (mult_(a, b) == identity_) {
        inverse_[static_cast<std::size_t>(a)] = b;
        break;
      }
  for (Element a = 0; a < n; ++a)
    if (inverse_[static_cast<std::size_t>(a)] < 0) throw InputError("element '" + label(a) + "' has no stored inverse");
  lengths_.assign(static_cast<std::size_t>(n), -1);
  lengths_[static_cast<std::size_t>(identity_)] = 0;
  std::deque<Element> queue{identity_};
  while (!queue.empty()) {
    const Element g = queue.front();
    queue.pop_front();
    for (Element s : generators_) {
      const int h = mult_(g, s);
      if (h >= 0 && lengths_[static_cast<std::size_t>(h)] < 0) {
        lengths_[static_cast<std::size_t>(h)] = lengths_[static_cast<std::size_t>(g)] + 1;
        queue.push_back(h);
      }
    }
  }
}

Element GroupModel::element(const std::string& name) const {
  auto it = std::find(labels_.begin(), labels_.end(), name);
  if (it == labels_.end()) throw InputError("unknown group element '" + name + "'");
  return static_cast<Element>(it - labels_.begin());
}

bool GroupModel::in_exact_region(Element g) const {
  return !truncation_ || 2 * length(g) <= *truncation_;
}

SpacePtr word_metric_space(const GroupModel& group) {
  std::vector<std::pair<Point, Point>> edges;
  for (Element g = 0; g < group.size(); ++g)
    for (Element s : group.generators())
      if (auto h = group.mul(g, s); h && g < *h) edges.emplace_back(g, *h);
  try {
    FiniteMetricSpace space = FiniteMetricSpace::from_graph(group.labels(), edges);
    // Z_n with generators {1, n - 1} is the n-cycle in stored order.
    if (group.finite() && group.coordinate_count() == 1 && group.size() > 2)
      space = space.with_layout(CycleLayout{group.size()});
    return share(std::move(space));
  } catch (const InputError& e) {
    throw InputError(std::string("generating set does not connect the stored elements: ") + e.what());
  }
}

namespace {

Point shift_along_layout(const FiniteMetricSpace& space, Point x, long shift) {
  if (const auto* cyc = std::get_if<CycleLayout>(&space.layout())) {
    const long n = cyc->n;
    return static_cast<Point>(((x + shift) % n + n) % n);
  }
  if (std::holds_alternative<IntervalLayout>(space.layout())) {
    const long hi = space.size() - 1;
    return static_cast<Point>(std::clamp(static_cast<long>(x) + shift, 0L, hi));
  }
  throw InputError("translation actions need an interval or cycle space");
}

}  // namespace

ActionMaps translation_maps(const GroupModel& group, const FiniteMetricSpace& space,
                            const std::vector<long>& weights) {
  if (static_cast<int>(weights.size()) != group.coordinate_count())
    throw InputError("translation rule needs one weight per group coordinate (" +
                     std::to_string(group.coordinate_count()) + ")");
  ActionMaps maps;
  for (Element g = 0; g < group.size(); ++g) {
    long shift = 0;
    for (std::size_t j = 0; j < weights.size(); ++j) shift += weights[j] * group.coordinates(g)[j];
    std::vector<Point> f;
    for (Point x = 0; x < space.size(); ++x) f.push_back(shift_along_layout(space, x, shift));
    maps.push_back(std::move(f));
  }
  return maps;
}

ActionMaps perturb_maps(const ActionMaps& base, const FiniteMetricSpace& space,
                        const std::vector<std::vector<long>>& offsets) {
  if (offsets.size() != base.size()) throw InputError("perturbation table needs one row per group element");
  ActionMaps out = base;
  for (std::size_t g = 0; g < base.size(); ++g) {
    if (offsets[g].size() != base[g].size()) throw InputError("perturbation row needs one offset per point");
    for (std::size_t x = 0; x < base[g].size(); ++x) out[g][x] = shift_along_layout(space, base[g][x], offsets[g][x]);
  }
  return out;
}

std::vector<std::vector<long>> random_offsets(int elements, int points, long amplitude, std::uint64_t seed) {
  if (amplitude < 0) throw InputError("perturbation amplitude must be nonnegative");
  std::mt19937_64 rng(seed);
  const auto span = static_cast<std::uint64_t>(2 * amplitude + 1);
  std::vector<std::vector<long>> out(static_cast<std::size_t>(elements), std::vector<long>(static_cast<std::size_t>(points)));
  for (auto& row : out)
    for (auto& v : row) v = static_cast<long>(rng() % span) - amplitude;
  return out;
}

double CoarseQuasiAction::modulus_at(double r) const {
  auto it = std::lower_bound(radii.begin(), radii.end(), r);
  return it == radii.end() ? global_bound : modulus[static_cast<std::size_t>(it - radii.begin())];
}

CoarseQuasiAction certify_quasi_action(GroupPtr group, SpacePtr space, ActionMaps maps,
                                       std::vector<double> sampled_radii, const QuasiActionCeilings& ceilings) {
  const int n = space->size();
  if (static_cast<int>(maps.size()) != group->size()) throw InputError("action needs one map per group element");
  for (std::size_t g = 0; g < maps.size(); ++g) {
    if (static_cast<int>(maps[g].size()) != n)
      throw InputError("map of '" + group->label(static_cast<Element>(g)) + "' is not total");
    for (Point y : maps[g])
      if (!space->contains(y)) throw InputError("map of '" + group->label(static_cast<Element>(g)) + "' leaves the space");
  }
  if (sampled_radii.empty()) sampled_radii = space->distance_values();
  std::sort(sampled_radii.begin(), sampled_radii.end());
  sampled_radii.erase(std::unique(sampled_radii.begin(), sampled_radii.end()), sampled_radii.end());

  CoarseQuasiAction a;
  a.group = group;
  a.group_space = word_metric_space(*group);
  a.space = space;
  a.maps = std::move(maps);
  a.radii = sampled_radii;
  a.modulus.assign(sampled_radii.size(), 0.0);

  // Modulus: bucket each pair at the smallest sample covering it, then prefix max.
  for (Element g = 0; g < group->size(); ++g)
    for (Point x = 0; x < n; ++x)
      for (Point y = x; y < n; ++y) {
        const double dy = space->d(a.apply(g, x), a.apply(g, y));
        a.global_bound = std::max(a.global_bound, dy);
        auto first = std::lower_bound(sampled_radii.begin(), sampled_radii.end(), space->d(x, y));
        if (first == sampled_radii.end()) continue;
        auto& slot = a.modulus[static_cast<std::size_t>(first - sampled_radii.begin())];
        slot = std::max(slot, dy);
      }
  for (std::size_t k = 1; k < a.modulus.size(); ++k) a.modulus[k] = std::max(a.modulus[k], a.modulus[k - 1]);

  const Element e = group->identity();
  for (Point x = 0; x < n; ++x) {
    const double v = space->d(a.apply(e, x), x);
    if (v > a.A) {
      a.A = v;
      a.a_point = x;
    }
  }
  for (Element g = 0; g < group->size(); ++g)
    for (Element h = 0; h < group->size(); ++h) {
      const auto gh = group->mul(g, h);
      if (!gh) continue;
      for (Point x = 0; x < n; ++x) {
        const double v = space->d(a.apply(g, a.apply(h, x)), a.apply(*gh, x));
        if (v > a.B) {
          a.B = v;
          a.b_g = g;
          a.b_h = h;
          a.b_x = x;
        }
      }
      if (*gh == e)
        for (Point x = 0; x < n; ++x)
          a.inverse_defect = std::max(a.inverse_defect, space->d(a.apply(g, a.apply(h, x)), x));
    }

  if (ceilings.A && a.A > *ceilings.A + kTolerance)
    throw CeilingExceeded("A = " + num(a.A) + " exceeds the ceiling " + num(*ceilings.A) + " at point '" +
                          space->id(a.a_point) + "'");
  if (ceilings.B && a.B > *ceilings.B + kTolerance)
    throw CeilingExceeded("B = " + num(a.B) + " exceeds the ceiling " + num(*ceilings.B) + " at g = '" +
                          group->label(a.b_g) + "', h = '" + group->label(a.b_h) + "', x = '" +
                          space->id(a.b_x) + "'");
  if (ceilings.modulus) {
    const auto [slope, intercept] = *ceilings.modulus;
    for (std::size_t k = 0; k < a.radii.size(); ++k) {
      if (a.modulus[k] <= slope * a.radii[k] + intercept + kTolerance) continue;
      // Locate a witnessing pair for the report.
      for (Element g = 0; g < group->size(); ++g)
        for (Point x = 0; x < n; ++x)
          for (Point y = x; y < n; ++y)
            if (space->d(x, y) <= a.radii[k] &&
                space->d(a.apply(g, x), a.apply(g, y)) > slope * a.radii[k] + intercept + kTolerance)
              throw CeilingExceeded("modulus l(" + num(a.radii[k]) + ") = " + num(a.modulus[k]) +
                                    " exceeds the ceiling at g = '" + group->label(g) + "', pair ('" +
                                    space->id(x) + "', '" + space->id(y) + "')");
    }
  }
  return a;
}

QuasiStabilizer quasi_stabilizer(const CoarseQuasiAction& action, Point x0, double T) {
  if (!action.space->contains(x0)) throw InputError("base point outside the space");
  if (T < 0.0) throw InputError("stabilizer threshold must be nonnegative");
  PointSet members;
  for (Element g = 0; g < action.group->size(); ++g)
    if (action.space->d(action.apply(g, x0), x0) <= T) members.push_back(g);
  return QuasiStabilizer{x0, T, SubspaceRef(action.group_space, std::move(members))};
}

OrbitMap orbit_map(const CoarseQuasiAction& action, Point x0) {
  if (!action.space->contains(x0)) throw InputError("base point outside the space");
  const auto& G = *action.group;
  std::vector<Point> pi;
  for (Element g = 0; g < G.size(); ++g) pi.push_back(action.apply(g, x0));

  OrbitMap out{check_coarse_map(action.group_space, action.space, pi, action.group_space->distance_values()), 0.0, 0.0, 0.0, 0, 0, {}};
  for (Element s : G.generators()) out.lambda = std::max(out.lambda, action.space->d(action.apply(s, x0), x0));
  out.constant = action.modulus_at(out.lambda) + action.B;
  for (Element g = 0; g < G.size(); ++g)
    for (Element s : G.generators()) {
      const auto gs = G.mul(g, s);
      if (!gs) continue;
      const double v = action.space->d(pi[static_cast<std::size_t>(g)], pi[static_cast<std::size_t>(*gs)]);
      if (v > out.max_step) {
        out.max_step = v;
        out.step_g = g;
        out.step_s = s;
      }
    }
  out.check = check_le("orbit map: d(pi(g), pi(gs)) <= l(lambda) + B", out.max_step, out.constant,
                       {G.label(out.step_g), G.label(*G.mul(out.step_g, out.step_s))});
  return out;
}

namespace {

std::string fmt(const char* pattern, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

}  // namespace

GroupPipelineResult group_pipeline(const CoarseQuasiAction& action, const Cover& cover,
                                   const GroupPipelineParams& prm, const PieceWitnessProvider& provider) {
  const auto& G = *action.group;
  const auto& X = *action.space;
  const auto& GS = *action.group_space;
  if (cover.space().ids() != X.ids()) throw InputError("cover does not live on the acted-on space");
  if (!(prm.R >= 0.0)) throw PreconditionError("R must be nonnegative");
  if (!(prm.epsilon > 0.0)) throw PreconditionError("epsilon must be positive");

  OrbitMap orbit = orbit_map(action, prm.x0);
  const double c = orbit.constant;
  const int k = multiplicity(cover) - 1;
  const double L = lebesgue_number(cover).value;
  const double required = 2.0 * c * prm.R * bell_constant(k, 1.0) / prm.epsilon;
  if (L + kTolerance < required)
    throw PreconditionError(fmt("Lebesgue number %.17g < required %.17g", L, required) +
                            " (L >= 2 l(lambda) R (2k+2)(2k+3) / epsilon)");
  Cover enlarged = enlarge(cover, L);
  if (multiplicity(enlarged) > k + 1)
    throw PreconditionError("enlarged cover has multiplicity " + std::to_string(multiplicity(enlarged)) +
                            " > k + 1 = " + std::to_string(k + 1));
  BellPartition bell = bell_partition(cover);

  const std::vector<Point> orbit_points = orbit.cert.assignment;
  auto pi = [&orbit_points](Element g) { return orbit_points[static_cast<std::size_t>(g)]; };

  // Centers: g_i minimizes the radius of V_i around pi(g_i).
  std::vector<GroupPiece> pieces;
  double T = 0.0;
  for (int i = 0; i < enlarged.size(); ++i) {
    GroupPiece piece;
    piece.radius = kInfinity;
    for (Element g = 0; g < G.size(); ++g) {
      double r = 0.0;
      for (Point v : enlarged.piece(i)) r = std::max(r, X.d(pi(g), v));
      if (r < piece.radius) {
        piece.radius = r;
        piece.center_element = g;
      }
    }
    piece.center = pi(piece.center_element);
    for (Element h = 0; h < G.size(); ++h)
      if (enlarged.contains(i, pi(h))) piece.preimage.push_back(h);
    T = std::max(T, piece.radius);
    pieces.push_back(std::move(piece));
  }
  for (int i = 0; i < enlarged.size(); ++i)
    if (pieces[static_cast<std::size_t>(i)].preimage.empty())
      throw PreconditionError("piece " + std::to_string(i) + " of the enlarged cover misses the orbit of x0");

  const double threshold = action.A + 2.0 * action.B + action.modulus_at(T);
  QuasiStabilizer W = quasi_stabilizer(action, prm.x0, threshold);

  GroupPipelineResult out{std::move(orbit), std::move(enlarged), std::move(bell), k, L, required, T, threshold,
                          std::move(W), std::move(pieces), std::nullopt, std::nullopt, std::nullopt, 0.0, {}, {}};
  auto& checks = out.checks;
  checks.push_back(out.orbit.check);
  checks.push_back(check_le("required L <= Lebesgue number of U", required, L));
  checks.push_back(check_le("multiplicity of V = U(L) <= k + 1", multiplicity(out.enlarged), k + 1.0));

  // Containment chain: g_i^{-1} pi^{-1}(V_i) inside W_{A+2B+l(T)}(x0).
  bool contained = true;
  for (std::size_t i = 0; i < out.pieces.size(); ++i) {
    const auto& piece = out.pieces[i];
    const Element gi_inv = G.inverse(piece.center_element);
    double worst = 0.0;
    Element worst_h = piece.preimage.front();
    for (Element h : piece.preimage) {
      const auto q = G.mul(gi_inv, h);
      if (!q)
        throw PreconditionError("truncated group lacks the product " + G.label(gi_inv) + " * " + G.label(h) +
                                " needed for piece " + std::to_string(i));
      const double v = X.d(out.orbit.cert(*q), prm.x0);
      if (v > worst) {
        worst = v;
        worst_h = h;
      }
    }
    auto q = check_le("piece " + std::to_string(i) + ": g_i^-1 pi^-1(V_i) inside W_{A+2B+l(T)}(x0)", worst,
                      threshold, {G.label(piece.center_element), G.label(worst_h)}, 0.0);
    contained = contained && q.pass;
    checks.push_back(std::move(q));
  }

  // Verification pairs: d_G <= R, restricted to the exact region on truncations.
  std::vector<std::pair<Element, Element>> pairs;
  for (Element g = 0; g < G.size(); ++g) {
    if (!G.in_exact_region(g)) continue;
    for (Element h = g; h < G.size(); ++h)
      if (G.in_exact_region(h) && GS.d(g, h) <= prm.R) pairs.emplace_back(g, h);
  }

  // Neighbourhood step: g in pi^{-1}(U_i), d(g, g') <= R forces pi(g') into V_i.
  {
    double worst = 0.0;
    std::pair<Element, Element> at{0, 0};
    for (auto [g, h] : pairs)
      for (int i = 0; i < cover.size(); ++i) {
        const auto& U = cover.piece(i);
        if (cover.contains(i, pi(g))) {
          const double v = dist_to_set(X, pi(h), U);
          if (v > worst) worst = v, at = {g, h};
        }
        if (cover.contains(i, pi(h))) {
          const double v = dist_to_set(X, pi(g), U);
          if (v > worst) worst = v, at = {h, g};
        }
      }
    out.informational.push_back(check_le("info: d(g, g') <= R, pi(g) in U_i: d(pi(g'), U_i) <= L", worst, L,
                                         {G.label(at.first), G.label(at.second)}));
  }

  // Partition on G: phi_i o pi, subordinated to the preimages of V.
  std::vector<PointSet> preimages;
  for (const auto& piece : out.pieces) preimages.push_back(piece.preimage);
  Cover group_cover(action.group_space, preimages);
  std::vector<Eigen::Triplet<double>> entries;
  for (Element g = 0; g < G.size(); ++g)
    for (PartitionValues::InnerIterator it(out.bell.partition.values(), pi(g)); it; ++it)
      entries.emplace_back(static_cast<int>(it.row()), g, it.value());
  PartitionValues values(cover.size(), G.size());
  values.setFromTriplets(entries.begin(), entries.end());
  PartitionOfUnity partition(group_cover, std::move(values));

  PairMax variation;
  for (auto [g, h] : pairs) {
    const double v = partition_distance(partition, g, h);
    if (variation.x < 0 || v > variation.value) variation = {v, g, h};
  }
  out.variation_at_R = variation.value;
  const std::pair<std::string, std::string> vpair{G.label(std::max(variation.x, 0)), G.label(std::max(variation.y, 0))};
  const double bell_chain = bell_constant(k, L) * c * prm.R;
  checks.push_back(check_le("sum|dphi| on G at R <= (2k+2)(2k+3)/L * (l(lambda)+B) * R", variation.value,
                            bell_chain, vpair));
  checks.push_back(check_le("(2k+2)(2k+3)/L * (l(lambda)+B) * R <= epsilon/2", bell_chain, prm.epsilon / 2.0));
  checks.push_back(check_le("sum|dphi| on G at R <= epsilon", variation.value, prm.epsilon, vpair));

  double identity_defect = 0.0;
  for (Element g = 0; g < G.size(); ++g)
    identity_defect = std::max(identity_defect, std::abs(Eigen::VectorXd(partition.values().col(g)).sum() - 1.0));
  checks.push_back(check_le("partition identity: | sum_i phi_i(g) - 1 |", identity_defect, 0.0));

  if (G.truncation_radius())
    out.informational.push_back(check_le("truncation radius N (pairs restricted to |g| <= N/2)",
                                         *G.truncation_radius(), *G.truncation_radius()));
  out.informational.push_back(check_le("T = max_i radius of V_i", T, T));
  out.informational.push_back(check_le("A + 2B + l(T)", threshold, threshold));

  if (!contained) {
    out.partition = std::move(partition);
    return out;
  }

  // Piece witnesses: provider witness on W, moved by g_i, restricted to pi^{-1}(V_i).
  SpacePtr W_space = out.stabilizer.members.materialize();
  const Witness beta = provider(W_space, 0);
  if (beta.space().ids() != W_space->ids())
    throw InputError("stabilizer witness does not live on W_{A+2B+l(T)}(x0)");
  if (beta.tagged()) throw InputError("stabilizer witness must have a bare index");
  const PointSet& Wm = out.stabilizer.members.members;

  WitnessFamily family;
  double piece_variation = 0.0;
  for (std::size_t i = 0; i < out.pieces.size(); ++i) {
    const Element gi = out.pieces[i].center_element;
    PointSet movable;
    for (std::size_t j = 0; j < Wm.size(); ++j)
      if (G.mul(gi, Wm[j])) movable.push_back(static_cast<Point>(j));
    const Witness source = movable.size() == Wm.size() ? beta : subspace_witness(beta, movable).collapsed;

    PointSet image;
    for (Point j : movable) image.push_back(*G.mul(gi, Wm[static_cast<std::size_t>(j)]));
    const PointSet sorted = normalized(image);
    std::vector<Point> map;
    for (Element h : image)
      map.push_back(static_cast<Point>(std::lower_bound(sorted.begin(), sorted.end(), h) - sorted.begin()));
    SubspaceRef translate(action.group_space, sorted);
    const Witness moved = transport(source, translate.materialize(), map);

    PointSet local;
    for (Element h : out.pieces[i].preimage) local.push_back(*translate.local_index(h));
    Witness piece = subspace_witness(moved, local).collapsed;
    const std::vector<double> radius{prm.R};
    piece_variation = std::max(piece_variation, variation_profile(piece, radius)[0].value);
    family.members.push_back(std::move(piece));
  }
  checks.push_back(check_le("piece witness variation at R <= epsilon/4", piece_variation, prm.epsilon / 4.0));

  const std::vector<double> scales = GS.distance_values();
  out.glued = glue(partition, family, scales);
  append(checks, out.glued->checks);
  out.piece_witnesses = std::move(family);
  out.partition = std::move(partition);
  return out;
}

}  // namespace coarse

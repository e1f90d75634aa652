#include "coarse/scenario.hpp"

#include "coarse/construct.hpp"
#include "coarse/cover.hpp"
#include "coarse/error.hpp"
#include "coarse/group.hpp"
#include "coarse/partition.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace coarse {

using io::Json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw InputError(where + ": " + what); }

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json number_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

Json ineq_json(const Inequality& q) {
  Json out{{"name", q.name}, {"lhs", q.lhs}, {"rhs", q.rhs}, {"pass", q.pass}};
  if (!q.pass && q.witness_pair) out["witness_pair"] = {q.witness_pair->first, q.witness_pair->second};
  return out;
}

Inequality lebesgue_check(const Cover& cover, double L, const std::string& name) {
  const double leb = lebesgue_number(cover).value;
  // Balls only change at realized distances, so fitting at L can hold with a
  // realized Lebesgue number below an unrealized L.
  return check_le(name, L, balls_fit(cover, L) ? std::max(leb, L) : leb, 0.0);
}

struct Report {
  std::vector<Inequality> checks;
  std::vector<Inequality> info;
  Json bounds = Json::object();
  Json truncation = Json::object();
  Samples variation;
  Samples tail;
  std::optional<double> delta;
};

class Runner {
 public:
  explicit Runner(const Scenario& sc) : sc_(sc) {}

  Certificate run() {
    Report r;
    const auto& p = sc_.pipeline;
    if (p == "verify-cover") verify_cover(r);
    else if (p == "bell") bell(r);
    else if (p == "glue") glue_pipeline(r);
    else if (p == "subspace") subspace(r);
    else if (p == "net") net(r);
    else if (p == "direct-limit") direct_limit(r);
    else if (p == "fibering") fibering(r);
    else if (p == "separated") separated(r);
    else if (p == "group-pipeline") group(r);
    else fail("pipeline", "unknown pipeline '" + p + "'");
    return finish(std::move(r));
  }

 private:
  // ---- parameters -------------------------------------------------------
  const Json* param(const char* key) const {
    if (!sc_.parameters.is_object()) return nullptr;
    auto it = sc_.parameters.find(key);
    return it == sc_.parameters.end() || it->is_null() ? nullptr : &*it;
  }
  std::optional<double> opt_number(const char* key) const {
    const Json* j = param(key);
    if (!j) return std::nullopt;
    if (!j->is_number()) fail(std::string("parameters.") + key, "expected a number");
    return j->get<double>();
  }
  double number(const char* key) const {
    auto v = opt_number(key);
    if (!v) fail("parameters", std::string("missing field '") + key + "'");
    return *v;
  }
  std::optional<int> opt_int(const char* key) const {
    const Json* j = param(key);
    if (!j) return std::nullopt;
    if (!j->is_number_integer()) fail(std::string("parameters.") + key, "expected an integer");
    return j->get<int>();
  }
  int integer(const char* key) const {
    auto v = opt_int(key);
    if (!v) fail("parameters", std::string("missing field '") + key + "'");
    return *v;
  }
  std::vector<double> grid(const char* key) const {
    std::vector<double> out;
    const Json* j = param(key);
    if (!j) return out;
    const std::string where = std::string("parameters.") + key;
    if (!j->is_array()) fail(where, "expected an array of numbers");
    for (std::size_t i = 0; i < j->size(); ++i) {
      if (!(*j)[i].is_number()) fail(where + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back((*j)[i].get<double>());
    }
    return out;
  }
  std::vector<double> radius_grid(const FiniteMetricSpace& space) const {
    if (param("R_grid")) return grid("R_grid");
    return space.distance_values();
  }
  Point point_param(const char* key, const FiniteMetricSpace& space) const {
    const Json* j = param(key);
    if (!j) fail("parameters", std::string("missing field '") + key + "'");
    const std::string id = j->is_string() ? j->get<std::string>()
                           : j->is_number_integer() ? std::to_string(j->get<long>())
                                                    : "";
    auto p = space.find(id);
    if (!p) fail(std::string("parameters.") + key, "unknown point '" + id + "'");
    return *p;
  }

  // ---- inputs -----------------------------------------------------------
  bool has_input(const char* key) const {
    return sc_.inputs.is_object() && sc_.inputs.contains(key) && !sc_.inputs[key].is_null();
  }
  // Resolves a file reference; returns the document and the label for errors.
  std::pair<Json, std::string> input(const char* key) const {
    if (!has_input(key)) fail("inputs", std::string("missing field '") + key + "'");
    return resolve(sc_.inputs[key], std::string("inputs.") + key);
  }
  std::pair<Json, std::string> resolve(const Json& j, const std::string& where) const {
    if (j.is_string()) {
      const auto file = sc_.base_dir / j.get<std::string>();
      return {io::load_file(file), file.filename().string()};
    }
    return {j, where};
  }

  SpacePtr space(const char* key = "space") const {
    auto [j, where] = input(key);
    return share(io::read_space(j, where));
  }
  Cover cover(const SpacePtr& s, const char* key = "cover") const {
    auto [j, where] = input(key);
    return io::read_cover(j, s, where);
  }

  static bool is_provider(const Json& j) { return j.is_object() && j.contains("provider"); }
  PieceWitnessProvider provider(const Json& j, const std::string& where) const {
    const Json& name = j["provider"];
    if (name == "dirac") return dirac_provider();
    if (name == "uniform_ball") {
      if (!j.contains("radius") || !j["radius"].is_number()) fail(where, "uniform_ball provider needs a numeric 'radius'");
      return uniform_ball_provider(j["radius"].get<double>());
    }
    fail(where + ".provider", "unknown provider " + name.dump());
  }
  /// Provider for the "pieces" input; defaults to dirac.
  PieceWitnessProvider piece_provider(const char* key = "pieces") const {
    if (!has_input(key)) return dirac_provider();
    auto [j, where] = input(key);
    if (!is_provider(j)) fail(where, "expected a provider object {\"provider\": ...}");
    return provider(j, where);
  }
  Witness witness_on(const SpacePtr& s, const char* key) const {
    auto [j, where] = input(key);
    if (is_provider(j)) return provider(j, where)(s, 0);
    return io::read_witness(j, s, where);
  }
  PointSet id_list(const char* key, const FiniteMetricSpace& s) const {
    auto [j, where] = input(key);
    if (!j.is_array()) fail(where, "expected an array of point ids");
    PointSet out;
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string w = where + "[" + std::to_string(i) + "]";
      const std::string id = j[i].is_string() ? j[i].get<std::string>()
                             : j[i].is_number_integer() ? std::to_string(j[i].get<long>())
                                                        : "";
      auto p = s.find(id);
      if (!p) fail(w, "unknown point '" + id + "'");
      out.push_back(*p);
    }
    return normalized(std::move(out));
  }

  // ---- shared reporting -------------------------------------------------
  void witness_profiles(Report& r, const Witness& w) const {
    const auto radii = radius_grid(w.space());
    const auto scales = grid("S");
    for (const auto& s : variation_profile(w, radii)) r.variation.emplace_back(s.scale, s.value);
    for (const auto& s : tail_profile(w, scales)) r.tail.emplace_back(s.scale, s.value);
    if (auto s0 = opt_number("S0")) {
      const std::vector<double> probe{*s0};
      r.delta = tail_profile(w, probe)[0].value;
    }
  }
  void epsilon_check(Report& r, const Witness& w) const {
    auto R = opt_number("R");
    auto eps = opt_number("epsilon");
    if (!R || !eps) return;
    const std::vector<double> probe{*R};
    const auto v = variation_profile(w, probe)[0];
    auto q = check_le("witness variation at R <= epsilon", v.value, *eps);
    if (v.x >= 0) q.witness_pair = {w.space().id(v.x), w.space().id(v.y)};
    r.checks.push_back(std::move(q));
  }

  // ---- pipelines --------------------------------------------------------
  void verify_cover(Report& r) const {
    SpacePtr s = space();
    auto k = opt_int("k");
    auto L = opt_number("L");
    std::optional<Cover> c;
    if (has_input("cover")) {
      c = cover(s);
    } else {
      if (!k || !L) fail("parameters", "a cover search needs both 'k' and 'L'");
      AsdimCover found = asdim_cover_search(s, *L, *k);
      r.bounds["strategy"] = found.strategy;
      r.bounds["diameter_bound"] = found.diameter_bound;
      r.bounds["pieces"] = found.cover.size();
      c = std::move(found.cover);
    }
    const auto leb = lebesgue_number(*c);
    r.bounds["multiplicity"] = multiplicity(*c);
    r.bounds["lebesgue_number"] = leb.value;
    r.bounds["smallest_failing_radius"] = number_or_null(leb.smallest_failing);
    if (auto R = opt_number("R")) r.bounds["R_multiplicity"] = r_multiplicity(*c, *R);
    if (k) r.checks.push_back(check_le("multiplicity <= k + 1", multiplicity(*c), *k + 1.0));
    if (L) r.checks.push_back(lebesgue_check(*c, *L, "L <= Lebesgue number"));
    // (k, sep)-separation of a colored cover, at the scale given by "separation".
    if (auto sep = opt_number("separation")) {
      if (!k) fail("parameters", "a separation check needs 'k'");
      double closest = kInfinity;
      std::pair<std::string, std::string> at;
      const bool separated = check_kl_separated(*c, *k, *sep);
      const auto& col = *c->coloring();
      for (int i = 0; i < c->size(); ++i)
        for (int j = i + 1; j < c->size(); ++j) {
          if (col[static_cast<std::size_t>(i)] != col[static_cast<std::size_t>(j)]) continue;
          const double d = set_distance(*s, c->piece(i), c->piece(j));
          if (d < closest) {
            closest = d;
            at = {"piece " + std::to_string(i), "piece " + std::to_string(j)};
          }
        }
      Inequality q{"(k, L)-separated: L < distance between same-colored pieces", *sep,
                   std::isfinite(closest) ? closest : s->diameter() + 1.0, separated, at};
      r.checks.push_back(std::move(q));
    }
  }

  void bell(Report& r) const {
    SpacePtr s = space();
    Cover c = cover(s);
    BellPartition b = bell_partition(c);
    const PairMax ratio = partition_lipschitz_ratio(b.partition);
    r.bounds["multiplicity"] = b.multiplicity;
    r.bounds["lebesgue_number"] = b.lebesgue;
    r.bounds["lipschitz_bound"] = b.lipschitz_bound;
    r.bounds["lipschitz_ratio"] = ratio.value;
    r.bounds["min_denominator"] = b.min_denominator;
    auto q = check_le("sum|dphi| / d <= (2k+2)(2k+3)/L over all pairs", ratio.value, b.lipschitz_bound);
    if (ratio.x >= 0) q.witness_pair = {s->id(ratio.x), s->id(ratio.y)};
    r.checks.push_back(std::move(q));
    r.checks.push_back(check_le("Lebesgue number <= sum_j d(x, X \\ U_j)", b.lebesgue, b.min_denominator));
    if (auto R = opt_number("R")) {
      const PairMax v = partition_variation(b.partition, *R);
      r.bounds["variation_at_R"] = v.value;
      std::pair<std::string, std::string> at{s->id(std::max(v.x, 0)), s->id(std::max(v.y, 0))};
      r.checks.push_back(check_le("sum|dphi| at R <= (2k+2)(2k+3)/L * R", v.value, b.lipschitz_bound * *R, at));
      if (auto eps = opt_number("epsilon"))
        r.checks.push_back(check_le("sum|dphi| at R <= epsilon", v.value, *eps, at));
    }
    for (double R : radius_grid(*s)) r.variation.emplace_back(R, partition_variation(b.partition, R).value);
  }

  PartitionOfUnity partition_input(const Cover& c, Report& r) const {
    if (!has_input("partition")) return bell_partition(c).partition;
    const Json& raw = sc_.inputs["partition"];
    if (raw == "bell") return bell_partition(c).partition;
    if (raw == "bell_weights") {
      r.info.push_back(check_le("info: uncertified Bell weights; Lebesgue number", lebesgue_number(c).value,
                                lebesgue_number(c).value));
      return bell_weights(c);
    }
    auto [j, where] = input("partition");
    return io::read_partition(j, c, where);
  }

  WitnessFamily pieces_input(const Cover& c) const {
    if (!has_input("pieces")) return provide_pieces(c, dirac_provider());
    auto [j, where] = input("pieces");
    if (is_provider(j)) return provide_pieces(c, provider(j, where));
    if (!j.is_array()) fail(where, "expected a provider object or one witness per piece");
    if (static_cast<int>(j.size()) != c.size())
      fail(where, "expected " + std::to_string(c.size()) + " piece witnesses, got " + std::to_string(j.size()));
    WitnessFamily family;
    for (int i = 0; i < c.size(); ++i) {
      const std::string w = where + "[" + std::to_string(i) + "]";
      auto [doc, label] = resolve(j[static_cast<std::size_t>(i)], w);
      SpacePtr piece = SubspaceRef(c.space_ptr(), c.piece(i)).materialize();
      // Entries naming points outside the piece surface as unknown ids; a
      // point of U_i without a vector is reported by name.
      try {
        family.members.push_back(io::read_witness(doc, piece, label));
      } catch (const InputError& e) {
        fail("piece " + std::to_string(i), e.what());
      }
    }
    return family;
  }

  void glue_pipeline(Report& r) const {
    SpacePtr s = space();
    Cover c = cover(s);
    PartitionOfUnity p = partition_input(c, r);
    WitnessFamily family = pieces_input(c);
    GlueResult g = glue(p, family, grid("S"));
    append(r.checks, g.checks);
    epsilon_check(r, g.witness);
    if (auto R = opt_number("R")) r.bounds["partition_variation_at_R"] = partition_variation(p, *R).value;
    r.bounds["index_size"] = static_cast<long>(g.witness.index().size());
    witness_profiles(r, g.witness);
  }

  void subspace(Report& r) const {
    SpacePtr s = space();
    Witness beta = witness_on(s, "witness");
    const PointSet Y = id_list("subspace", *s);
    SubspaceConstruction c = subspace_witness(beta, Y);
    append(r.checks, c.identities);
    append(r.checks, subspace_tail_checks(beta, c, grid("S")));
    r.bounds["subspace_size"] = static_cast<long>(Y.size());
    witness_profiles(r, c.collapsed);
  }

  void net(Report& r) const {
    SpacePtr s = space();
    const PointSet N = id_list("net", *s);
    const double c = number("c");
    SpacePtr net_space = SubspaceRef(s, N).materialize();
    Witness beta = witness_on(net_space, "witness");
    NetConstruction n = net_witness(beta, s, N, c);
    const auto radii = param("R") ? std::vector<double>{number("R")} : radius_grid(*s);
    append(r.checks, net_checks(beta, n, c, radii, grid("S")));
    epsilon_check(r, n.witness);
    witness_profiles(r, n.witness);
  }

  ChainOfSubspaces chain_input(const SpacePtr& s) const {
    auto [j, where] = input("chain");
    ChainOfSubspaces chain{s, {}};
    if (j.is_object() && j.contains("balls_around")) {
      const Json& cj = j["balls_around"];
      const std::string id = cj.is_string() ? cj.get<std::string>() : cj.dump();
      auto center = s->find(id);
      if (!center) fail(where + ".balls_around", "unknown point '" + id + "'");
      for (double radius : s->distance_values()) {
        if (radius <= 0.0) continue;
        chain.members.push_back(ball(*s, *center, radius));
      }
    } else {
      if (!j.is_array()) fail(where, "expected a list of member id lists or {\"balls_around\": id}");
      for (std::size_t n = 0; n < j.size(); ++n) {
        const std::string w = where + "[" + std::to_string(n) + "]";
        if (!j[n].is_array()) fail(w, "expected an array of point ids");
        PointSet m;
        for (std::size_t i = 0; i < j[n].size(); ++i) {
          const std::string id = j[n][i].is_string() ? j[n][i].get<std::string>() : j[n][i].dump();
          auto p = s->find(id);
          if (!p) fail(w, "unknown point '" + id + "'");
          m.push_back(*p);
        }
        chain.members.push_back(normalized(std::move(m)));
      }
    }
    chain.validate();
    return chain;
  }

  void direct_limit(Report& r) const {
    SpacePtr s = space();
    ChainOfSubspaces chain = chain_input(s);
    const double L = number("L");
    DirectLimitCover d = direct_limit_cover(chain, L);
    r.checks.push_back(check_le("multiplicity <= 2", multiplicity(d.cover), 2.0));
    r.checks.push_back(lebesgue_check(d.cover, L, "L <= Lebesgue number"));
    Inequality disjoint{"B(X_{n_k}, L) misses B(X_{n_{k+2}} \\ X_{n_{k+1}}, L)", 0.0, 0.0,
                        direct_limit_disjointness(chain, d, L), std::nullopt};
    if (!disjoint.pass) disjoint.lhs = 1.0;
    r.checks.push_back(std::move(disjoint));
    r.bounds["subsequence"] = d.subsequence;
    r.bounds["pieces"] = d.cover.size();
    r.bounds["chain_length"] = static_cast<long>(chain.members.size());
    std::vector<int> affected;
    for (std::size_t i = 0; i < d.truncation_affected.size(); ++i)
      if (d.truncation_affected[i]) affected.push_back(static_cast<int>(i));
    r.truncation["pieces_meeting_outer_shell"] = affected;
    r.truncation["note"] = "chain truncated at its last member";

    BellPartition b = bell_partition(d.cover);
    GlueResult g = glue(b.partition, provide_pieces(d.cover, piece_provider()), grid("S"));
    append(r.checks, g.checks);
    epsilon_check(r, g.witness);
    witness_profiles(r, g.witness);
  }

  void fibering(Report& r) const {
    SpacePtr src = space("source");
    SpacePtr tgt = space("target");
    auto [mj, mwhere] = input("map");
    const Json* assignment = mj.is_object() && mj.contains("assignment") ? &mj["assignment"] : nullptr;
    if (!assignment || !assignment->is_object()) fail(mwhere, "expected {\"assignment\": {source id: target id}}");
    std::vector<Point> f(static_cast<std::size_t>(src->size()), -1);
    for (auto it = assignment->begin(); it != assignment->end(); ++it) {
      auto x = src->find(it.key());
      if (!x) fail(mwhere + ".assignment", "unknown source point '" + it.key() + "'");
      const std::string tid = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
      auto y = tgt->find(tid);
      if (!y) fail(mwhere + ".assignment['" + it.key() + "']", "unknown target point '" + tid + "'");
      f[static_cast<std::size_t>(*x)] = *y;
    }
    for (Point x = 0; x < src->size(); ++x)
      if (f[static_cast<std::size_t>(x)] < 0) fail(mwhere + ".assignment", "no image for '" + src->id(x) + "'");
    CoarseMapCert cert = check_coarse_map(src, tgt, f, src->distance_values());
    Cover c = cover(tgt);
    PartitionOfUnity p = partition_input(c, r);
    const double R = number("R");
    FiberingResult out = fibering_pipeline(cert, p, piece_provider(), R, grid("S"));
    append(r.checks, out.checks);
    r.bounds["image_scale"] = out.image_scale;
    r.bounds["target_variation"] = out.target_variation;
    r.bounds["pulled_variation"] = out.pulled_variation;
    r.bounds["pulled_pieces"] = out.pulled.partition.cover().size();
    if (auto eps = opt_number("epsilon"))
      r.checks.push_back(check_le("pulled-back sum|dphi| at R <= epsilon", out.pulled_variation, *eps));
    witness_profiles(r, out.glued.witness);
  }

  void separated(Report& r) const {
    SpacePtr s = space();
    Cover c = cover(s);
    SeparatedParams prm{integer("k"), number("L"), number("sigma"), number("R"), number("epsilon")};
    SeparatedResult out = separated_cover_pipeline(c, prm, piece_provider(), grid("S"));
    append(r.checks, out.checks);
    r.info = out.informational;
    r.bounds["variation_at_R"] = out.variation_at_R;
    r.bounds["lipschitz_bound"] = out.bell.lipschitz_bound;
    r.bounds["enlarged_multiplicity"] = out.bell.multiplicity;
    r.bounds["enlarged_lebesgue"] = out.bell.lebesgue;
    witness_profiles(r, out.glued.witness);
  }

  void group(Report& r) const {
    auto [gj, gwhere] = input("group");
    auto G = std::make_shared<const GroupModel>(io::read_group(gj, gwhere));
    SpacePtr s = space();
    auto [aj, awhere] = input("action");
    ActionMaps maps = io::read_action(aj, *G, *s, awhere);
    QuasiActionCeilings ceilings;
    if (const Json* cj = param("ceilings")) {
      if (cj->contains("A")) ceilings.A = (*cj)["A"].get<double>();
      if (cj->contains("B")) ceilings.B = (*cj)["B"].get<double>();
    }
    CoarseQuasiAction action = certify_quasi_action(G, s, std::move(maps), {}, ceilings);
    Cover c = cover(s);
    GroupPipelineParams prm{point_param("x0", *s), number("R"), number("epsilon")};
    GroupPipelineResult out = group_pipeline(action, c, prm, piece_provider("stabilizer_witness"));
    r.checks = out.checks;
    r.info = out.informational;
    r.bounds["A"] = action.A;
    r.bounds["B"] = action.B;
    r.bounds["inverse_defect"] = action.inverse_defect;
    r.bounds["lambda"] = out.orbit.lambda;
    r.bounds["orbit_constant"] = out.orbit.constant;
    r.bounds["k"] = out.k;
    r.bounds["L"] = out.L;
    r.bounds["required_L"] = out.required_L;
    r.bounds["T"] = out.T;
    r.bounds["stabilizer_threshold"] = out.stabilizer_threshold;
    r.bounds["stabilizer_size"] = static_cast<long>(out.stabilizer.members.members.size());
    r.bounds["variation_at_R"] = out.variation_at_R;
    Json centers = Json::array();
    for (const auto& piece : out.pieces)
      centers.push_back({{"g", G->label(piece.center_element)}, {"x", s->id(piece.center)}, {"radius", piece.radius}});
    r.bounds["pieces"] = std::move(centers);
    r.truncation["truncation_radius"] = number_or_null(G->truncation_radius() ? std::optional<double>(*G->truncation_radius()) : std::nullopt);
    if (G->truncation_radius()) r.truncation["verification_region"] = "|g| <= N/2";
    if (out.partition) {
      for (double R : radius_grid(*action.group_space)) {
        PairMax best;
        const auto& GS = *action.group_space;
        for (Element g = 0; g < G->size(); ++g)
          for (Element h = g; h < G->size(); ++h)
            if (G->in_exact_region(g) && G->in_exact_region(h) && GS.d(g, h) <= R)
              best.value = std::max(best.value, partition_distance(*out.partition, g, h));
        r.variation.emplace_back(R, best.value);
      }
    }
    if (out.glued) {
      const auto scales = grid("S");
      for (const auto& t : tail_profile(out.glued->witness, scales)) r.tail.emplace_back(t.scale, t.value);
      if (auto s0 = opt_number("S0")) {
        const std::vector<double> probe{*s0};
        r.delta = tail_profile(out.glued->witness, probe)[0].value;
      }
    }
  }

  Certificate finish(Report r) const {
    Certificate cert;
    cert.name = sc_.name;
    cert.pass = all_pass(r.checks);
    Json checks = Json::array();
    for (const auto& q : r.checks) checks.push_back(ineq_json(q));
    Json info = Json::array();
    for (const auto& q : r.info) info.push_back(ineq_json(q));
    Json variation = Json::array();
    for (auto [R, v] : r.variation) variation.push_back({{"R", R}, {"value", v}});
    Json tail = Json::array();
    for (auto [S, v] : r.tail) tail.push_back({{"S", S}, {"value", v}});
    auto S0 = opt_number("S0");
    cert.body = Json{{"scenario", sc_.name},
                     {"pipeline", sc_.pipeline},
                     {"pass", cert.pass},
                     {"R", number_or_null(opt_number("R"))},
                     {"epsilon", number_or_null(opt_number("epsilon"))},
                     {"S0", number_or_null(S0)},
                     {"delta", number_or_null(r.delta)},
                     {"bounds", std::move(r.bounds)},
                     {"checked_inequalities", std::move(checks)},
                     {"informational", std::move(info)},
                     {"profiles", {{"variation", std::move(variation)}, {"tail", std::move(tail)}}},
                     {"truncation_flags", std::move(r.truncation)}};
    cert.variation = std::move(r.variation);
    cert.tail = std::move(r.tail);
    return cert;
  }

  const Scenario& sc_;
};

}  // namespace

const std::vector<std::string>& pipeline_names() {
  static const std::vector<std::string> names{"verify-cover", "bell",       "glue",      "subspace",      "net",
                                              "direct-limit", "fibering",   "separated", "group-pipeline"};
  return names;
}

Scenario parse_scenario(const Json& doc, std::filesystem::path base_dir) {
  if (!doc.is_object()) fail("scenario", "expected an object");
  Scenario sc;
  if (!doc.contains("name") || !doc["name"].is_string()) fail("scenario", "missing string field 'name'");
  if (!doc.contains("pipeline") || !doc["pipeline"].is_string()) fail("scenario", "missing string field 'pipeline'");
  sc.name = doc["name"].get<std::string>();
  sc.pipeline = doc["pipeline"].get<std::string>();
  const auto& names = pipeline_names();
  if (std::find(names.begin(), names.end(), sc.pipeline) == names.end())
    fail("scenario.pipeline", "unknown pipeline '" + sc.pipeline + "'");
  sc.inputs = doc.value("inputs", Json::object());
  sc.parameters = doc.value("parameters", Json::object());
  if (!sc.inputs.is_object()) fail("scenario.inputs", "expected an object");
  if (!sc.parameters.is_object()) fail("scenario.parameters", "expected an object");
  sc.base_dir = std::move(base_dir);
  return sc;
}

Scenario load_scenario(const std::filesystem::path& file) {
  return parse_scenario(io::load_file(file), file.parent_path());
}

Certificate run_pipeline(const Scenario& scenario) { return Runner(scenario).run(); }

RunOutcome run_scenario(const std::filesystem::path& file) {
  RunOutcome out;
  try {
    out.certificate = run_pipeline(load_scenario(file));
    out.exit_code = out.certificate->pass ? 0 : 1;
  } catch (const PreconditionError& e) {
    out.exit_code = 2;
    out.error = std::string("precondition failed: ") + e.what();
  } catch (const InputError& e) {
    out.exit_code = 2;
    out.error = std::string("input error: ") + e.what();
  } catch (const SearchExhausted& e) {
    out.exit_code = 2;
    out.error = std::string("search exhausted (inconclusive): ") + e.what();
  }
  return out;
}

std::string certificate_text(const Certificate& cert) { return io::dump(cert.body); }

namespace {

std::string csv(const char* header, const Samples& rows) {
  std::string out = std::string(header) + "\n";
  for (auto [a, b] : rows) out += g17(a) + "," + g17(b) + "\n";
  return out;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream f(file, std::ios::binary);
  if (!f) throw InputError(file.string() + ": cannot write file");
  f << text;
}

}  // namespace

std::string variation_csv(const Certificate& cert) { return csv("R,variation", cert.variation); }
std::string tail_csv(const Certificate& cert) { return csv("S,tail", cert.tail); }

std::vector<std::filesystem::path> export_profiles(const Certificate& cert, const std::string& format,
                                                   const std::filesystem::path& dir) {
  if (format != "csv") throw InputError("unsupported profile format '" + format + "' (supported: csv)");
  std::filesystem::create_directories(dir);
  const auto v = dir / (cert.name + ".variation.csv");
  const auto t = dir / (cert.name + ".tail.csv");
  write_text(v, variation_csv(cert));
  write_text(t, tail_csv(cert));
  return {v, t};
}

int thread_budget() {
  if (const char* env = std::getenv("COARSE_LAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SuiteSummary run_suite(const std::filesystem::path& dir, int threads,
                       const std::optional<std::filesystem::path>& out_dir) {
  if (!std::filesystem::is_directory(dir)) throw InputError(dir.string() + ": not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".json") continue;
    // Data files sit next to scenarios; only documents naming a pipeline run.
    bool scenario = true;
    try {
      const Json doc = io::load_file(e.path());
      scenario = doc.is_object() && doc.contains("pipeline");
    } catch (const InputError&) {
    }
    if (scenario) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });

  SuiteSummary summary;
  summary.entries.resize(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      RunOutcome o = run_scenario(files[i]);
      SuiteEntry& e = summary.entries[i];
      e.file = files[i].filename().string();
      e.exit_code = o.exit_code;
      e.detail = o.exit_code == 0 ? "pass" : o.exit_code == 1 ? "FAIL (inequality violated)" : o.error;
      if (out_dir && o.certificate) {
        std::filesystem::create_directories(*out_dir);
        write_text(*out_dir / (o.certificate->name + ".cert.json"), certificate_text(*o.certificate));
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(files.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  summary.total = static_cast<int>(files.size());
  for (const auto& e : summary.entries) summary.passed += e.exit_code == 0;
  return summary;
}

}  // namespace coarse

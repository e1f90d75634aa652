#include "coarse/io.hpp"

#include "coarse/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace coarse::io {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw InputError(where + ": " + what); }

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

const Json* optional_field(const Json& j, const char* key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

long as_int(const Json& j, const std::string& where) {
  if (j.is_number_integer()) return j.get<long>();
  if (j.is_number_float() && std::floor(j.get<double>()) == j.get<double>()) return static_cast<long>(j.get<double>());
  fail(where, "expected an integer");
}

double as_number(const Json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

std::string as_id(const Json& j, const std::string& where) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long>());
  fail(where, "expected a point id (string or integer)");
}

const Json& as_array(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  return j;
}

std::string at(const std::string& where, std::size_t i) { return where + "[" + std::to_string(i) + "]"; }
std::string dot(const std::string& where, const char* key) { return where + "." + key; }

Point lookup(const FiniteMetricSpace& space, const Json& j, const std::string& where) {
  const std::string id = as_id(j, where);
  auto p = space.find(id);
  if (!p) fail(where, "unknown point '" + id + "'");
  return *p;
}

std::vector<std::string> read_ids(const Json& j, const std::string& where) {
  std::vector<std::string> out;
  const auto& arr = as_array(j, where);
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(as_id(arr[i], at(where, i)));
  return out;
}

void write_value(const Json& v, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        write_value(it.value(), out, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        write_value(v[i], out, depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", d);
      out += buf;
      return;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

Json load_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError(file.string() + ": cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    std::string msg = e.what();
    // Drop the "[json.exception.parse_error.N] " prefix.
    if (auto pos = msg.find("] "); pos != std::string::npos) msg = msg.substr(pos + 2);
    throw InputError(file.string() + ": " + msg);
  }
}

std::string dump(const Json& value) {
  std::string out;
  write_value(value, out, 0);
  out += "\n";
  return out;
}

FiniteMetricSpace read_space(const Json& j, const std::string& where) {
  const Json& metric = field(j, "metric", where);
  const std::string mwhere = dot(where, "metric");
  const Json& type = field(metric, "type", mwhere);
  if (!type.is_string()) fail(dot(mwhere, "type"), "expected a string");
  const std::string kind = type.get<std::string>();

  auto ids = [&] { return read_ids(field(j, "points", where), dot(where, "points")); };
  FiniteMetricSpace space = [&] {
    if (kind == "matrix") {
      auto names = ids();
      const auto& rows = as_array(field(metric, "d", mwhere), dot(mwhere, "d"));
      const auto n = static_cast<Eigen::Index>(names.size());
      if (static_cast<Eigen::Index>(rows.size()) != n) fail(dot(mwhere, "d"), "expected one row per point");
      DistanceMatrix d(n, n);
      for (Eigen::Index r = 0; r < n; ++r) {
        const std::string rw = at(dot(mwhere, "d"), static_cast<std::size_t>(r));
        const auto& row = as_array(rows[static_cast<std::size_t>(r)], rw);
        if (static_cast<Eigen::Index>(row.size()) != n) fail(rw, "expected one entry per point");
        for (Eigen::Index c = 0; c < n; ++c) d(r, c) = as_number(row[static_cast<std::size_t>(c)], at(rw, static_cast<std::size_t>(c)));
      }
      return FiniteMetricSpace::from_matrix(std::move(names), std::move(d));
    }
    if (kind == "graph") {
      auto names = ids();
      std::map<std::string, Point> index;
      for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = static_cast<Point>(i);
      std::vector<std::pair<Point, Point>> edges;
      const std::string ew = dot(mwhere, "edges");
      const auto& arr = as_array(field(metric, "edges", mwhere), ew);
      for (std::size_t e = 0; e < arr.size(); ++e) {
        const auto& pair = as_array(arr[e], at(ew, e));
        if (pair.size() != 2) fail(at(ew, e), "expected [i, j]");
        Point ends[2];
        for (std::size_t s = 0; s < 2; ++s) {
          const std::string pw = at(at(ew, e), s);
          if (pair[s].is_number_integer()) {
            ends[s] = static_cast<Point>(pair[s].get<long>());
            if (ends[s] < 0 || ends[s] >= static_cast<Point>(names.size())) fail(pw, "point index out of range");
          } else {
            auto it = index.find(as_id(pair[s], pw));
            if (it == index.end()) fail(pw, "unknown point '" + as_id(pair[s], pw) + "'");
            ends[s] = it->second;
          }
        }
        edges.emplace_back(ends[0], ends[1]);
      }
      return FiniteMetricSpace::from_graph(std::move(names), edges);
    }
    if (kind == "z_interval") {
      const long lo = as_int(field(metric, "lo", mwhere), dot(mwhere, "lo"));
      const long hi = as_int(field(metric, "hi", mwhere), dot(mwhere, "hi"));
      if (hi < lo) fail(mwhere, "empty interval");
      return FiniteMetricSpace::z_interval(lo, hi);
    }
    if (kind == "cycle") {
      const long n = as_int(field(metric, "n", mwhere), dot(mwhere, "n"));
      if (n < 1) fail(dot(mwhere, "n"), "cycle length must be positive");
      return FiniteMetricSpace::cycle(static_cast<int>(n));
    }
    if (kind == "grid") {
      std::vector<int> dims;
      const std::string dw = dot(mwhere, "dims");
      const auto& arr = as_array(field(metric, "dims", mwhere), dw);
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const long v = as_int(arr[i], at(dw, i));
        if (v < 1) fail(at(dw, i), "grid side must be positive");
        dims.push_back(static_cast<int>(v));
      }
      if (dims.empty()) fail(dw, "grid needs at least one dimension");
      GridNorm norm = GridNorm::l1;
      if (const Json* nj = optional_field(metric, "norm")) {
        const std::string s = nj->is_string() ? nj->get<std::string>() : "";
        if (s == "linf")
          norm = GridNorm::linf;
        else if (s != "l1")
          fail(dot(mwhere, "norm"), "expected \"l1\" or \"linf\"");
      }
      return FiniteMetricSpace::grid(std::move(dims), norm);
    }
    fail(dot(mwhere, "type"), "unknown metric type '" + kind + "'");
  }();

  if (kind != "matrix" && kind != "graph") {
    if (const Json* pts = optional_field(j, "points")) {
      if (read_ids(*pts, dot(where, "points")) != space.ids())
        fail(dot(where, "points"), "listed points differ from the ids the " + kind + " metric generates");
    }
  }
  if (const Json* keep = optional_field(j, "restrict")) {
    const std::string rw = dot(where, "restrict");
    PointSet members;
    const auto& arr = as_array(*keep, rw);
    for (std::size_t i = 0; i < arr.size(); ++i) members.push_back(lookup(space, arr[i], at(rw, i)));
    members = normalized(std::move(members));
    if (members.empty()) fail(rw, "restriction is empty");
    space = restrict_to(space, members);
  }
  return space;
}

Cover read_cover(const Json& j, const SpacePtr& space, const std::string& where) {
  const std::string pw = dot(where, "pieces");
  const auto& arr = as_array(field(j, "pieces", where), pw);
  std::vector<PointSet> pieces;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    PointSet piece;
    const auto& members = as_array(arr[i], at(pw, i));
    for (std::size_t m = 0; m < members.size(); ++m) piece.push_back(lookup(*space, members[m], at(at(pw, i), m)));
    pieces.push_back(normalized(std::move(piece)));
  }
  std::optional<std::vector<int>> coloring;
  if (const Json* cj = optional_field(j, "coloring")) {
    const std::string cw = dot(where, "coloring");
    const auto& carr = as_array(*cj, cw);
    coloring.emplace();
    for (std::size_t i = 0; i < carr.size(); ++i) coloring->push_back(static_cast<int>(as_int(carr[i], at(cw, i))));
  }
  try {
    return Cover(space, std::move(pieces), std::move(coloring));
  } catch (const InputError& e) {
    fail(where, e.what());
  }
}

PartitionOfUnity read_partition(const Json& j, const Cover& cover, const std::string& where) {
  const Json* triples = &j;
  std::string tw = where;
  if (j.is_object()) {
    triples = &field(j, "values", where);
    tw = dot(where, "values");
  }
  const auto& arr = as_array(*triples, tw);
  std::vector<Eigen::Triplet<double>> entries;
  std::set<std::pair<long, Point>> seen;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string ew = at(tw, i);
    const long piece = as_int(field(arr[i], "piece", ew), dot(ew, "piece"));
    if (piece < 0 || piece >= cover.size()) fail(dot(ew, "piece"), "piece index out of range");
    const Point x = lookup(cover.space(), field(arr[i], "point", ew), dot(ew, "point"));
    const double v = as_number(field(arr[i], "value", ew), dot(ew, "value"));
    if (!seen.insert({piece, x}).second) fail(ew, "duplicate (piece, point) entry");
    entries.emplace_back(static_cast<int>(piece), x, v);
  }
  PartitionValues values(cover.size(), cover.space().size());
  values.setFromTriplets(entries.begin(), entries.end());
  try {
    return PartitionOfUnity(cover, std::move(values));
  } catch (const InputError& e) {
    fail(where, e.what());
  }
}

Witness read_witness(const Json& j, const SpacePtr& space, const std::string& where) {
  const Json* rows = &j;
  std::string rw = where;
  if (j.is_object()) {
    rows = &field(j, "vectors", where);
    rw = dot(where, "vectors");
  }
  const auto& arr = as_array(*rows, rw);
  struct Raw {
    IndexEntry entry;
    double c;
  };
  std::vector<std::vector<Raw>> per_point(static_cast<std::size_t>(space->size()));
  std::vector<bool> given(static_cast<std::size_t>(space->size()), false);
  std::set<IndexEntry> index_set;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string pw = at(rw, i);
    const Point x = lookup(*space, field(arr[i], "point", pw), dot(pw, "point"));
    if (given[static_cast<std::size_t>(x)]) fail(pw, "point '" + space->id(x) + "' listed twice");
    given[static_cast<std::size_t>(x)] = true;
    const std::string ew = dot(pw, "entries");
    const auto& entries = as_array(field(arr[i], "entries", pw), ew);
    std::set<IndexEntry> local;
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const std::string w = at(ew, e);
      IndexEntry entry;
      if (const Json* t = optional_field(entries[e], "tag")) entry.tag = as_int(*t, dot(w, "tag"));
      entry.at = lookup(*space, field(entries[e], "at", w), dot(w, "at"));
      if (!local.insert(entry).second) fail(w, "duplicate index entry");
      index_set.insert(entry);
      per_point[static_cast<std::size_t>(x)].push_back({entry, as_number(field(entries[e], "c", w), dot(w, "c"))});
    }
  }
  for (Point x = 0; x < space->size(); ++x)
    if (!given[static_cast<std::size_t>(x)]) fail(rw, "no vector for point '" + space->id(x) + "'");
  std::vector<IndexEntry> index(index_set.begin(), index_set.end());
  std::vector<Coefficients> vectors;
  for (const auto& raw : per_point) {
    Coefficients v(static_cast<Eigen::Index>(index.size()));
    for (const auto& r : raw) {
      const auto k = std::lower_bound(index.begin(), index.end(), r.entry) - index.begin();
      v.insert(k) = r.c;
    }
    vectors.push_back(std::move(v));
  }
  try {
    return Witness(space, std::move(index), std::move(vectors));
  } catch (const InputError& e) {
    fail(where, e.what());
  }
}

GroupModel read_group(const Json& j, const std::string& where) {
  const Json& type = field(j, "type", where);
  if (!type.is_string()) fail(dot(where, "type"), "expected a string");
  const std::string kind = type.get<std::string>();
  try {
    if (kind == "cyclic") return GroupModel::cyclic(static_cast<int>(as_int(field(j, "n", where), dot(where, "n"))));
    if (kind == "product") {
      const std::string fw = dot(where, "factors");
      const auto& arr = as_array(field(j, "factors", where), fw);
      std::vector<int> orders;
      for (std::size_t i = 0; i < arr.size(); ++i) {
        if (arr[i].is_object()) {
          const std::string w = at(fw, i);
          const Json& ft = field(arr[i], "type", w);
          if (ft != "cyclic") fail(dot(w, "type"), "product factors must be cyclic groups");
          orders.push_back(static_cast<int>(as_int(field(arr[i], "n", w), dot(w, "n"))));
        } else {
          orders.push_back(static_cast<int>(as_int(arr[i], at(fw, i))));
        }
      }
      return GroupModel::product(orders);
    }
    if (kind == "ball") {
      std::vector<char> letters;
      const std::string gw = dot(where, "generators");
      for (const auto& word : read_ids(field(j, "generators", where), gw)) {
        if (word.size() != 1) fail(gw, "generator '" + word + "' must be a single letter");
        letters.push_back(word[0]);
      }
      return GroupModel::free_ball(letters, static_cast<int>(as_int(field(j, "radius", where), dot(where, "radius"))));
    }
  } catch (const InputError& e) {
    const std::string msg = e.what();
    if (msg.rfind(where, 0) == 0) throw;
    fail(where, msg);
  }
  fail(dot(where, "type"), "unknown group type '" + kind + "'");
}

ActionMaps read_action(const Json& j, const GroupModel& group, const FiniteMetricSpace& space,
                       const std::string& where) {
  const Json& type = field(j, "type", where);
  if (!type.is_string()) fail(dot(where, "type"), "expected a string");
  const std::string kind = type.get<std::string>();
  try {
    if (kind == "isometric_hom") {
      const Json& rule = field(j, "rule", where);
      const std::string rw = dot(where, "rule");
      if (rule.is_string() && rule.get<std::string>() == "identity") {
        ActionMaps maps(static_cast<std::size_t>(group.size()));
        for (auto& f : maps)
          for (Point x = 0; x < space.size(); ++x) f.push_back(x);
        return maps;
      }
      const Json& tr = field(rule, "translate", rw);
      std::vector<long> weights;
      if (tr.is_array()) {
        for (std::size_t i = 0; i < tr.size(); ++i) weights.push_back(as_int(tr[i], at(dot(rw, "translate"), i)));
      } else {
        weights.push_back(as_int(tr, dot(rw, "translate")));
      }
      return translation_maps(group, space, weights);
    }
    if (kind == "perturbed") {
      ActionMaps base = read_action(field(j, "base", where), group, space, dot(where, "base"));
      const Json& table = field(j, "perturbation_table", where);
      const std::string tw = dot(where, "perturbation_table");
      std::vector<std::vector<long>> offsets;
      if (table.is_object() && table.contains("amplitude")) {
        const long amplitude = as_int(table["amplitude"], dot(tw, "amplitude"));
        const long seed = table.contains("seed") ? as_int(table["seed"], dot(tw, "seed")) : 0;
        offsets = random_offsets(group.size(), space.size(), amplitude, static_cast<std::uint64_t>(seed));
      } else {
        const auto& rows = as_array(table, tw);
        for (std::size_t g = 0; g < rows.size(); ++g) {
          std::vector<long> row;
          const auto& r = as_array(rows[g], at(tw, g));
          for (std::size_t x = 0; x < r.size(); ++x) row.push_back(as_int(r[x], at(at(tw, g), x)));
          offsets.push_back(std::move(row));
        }
      }
      return perturb_maps(base, space, offsets);
    }
    if (kind == "table") {
      const Json& maps_j = field(j, "maps", where);
      const std::string mw = dot(where, "maps");
      ActionMaps maps(static_cast<std::size_t>(group.size()));
      for (Element g = 0; g < group.size(); ++g) {
        const std::string gw = mw + "['" + group.label(g) + "']";
        const Json& row = field(maps_j, group.label(g).c_str(), mw);
        const auto& arr = as_array(row, gw);
        if (static_cast<int>(arr.size()) != space.size()) fail(gw, "expected one image per point");
        for (std::size_t x = 0; x < arr.size(); ++x) maps[static_cast<std::size_t>(g)].push_back(lookup(space, arr[x], at(gw, x)));
      }
      return maps;
    }
  } catch (const InputError& e) {
    const std::string msg = e.what();
    if (msg.rfind(where, 0) == 0) throw;
    fail(where, msg);
  }
  fail(dot(where, "type"), "unknown action type '" + kind + "'");
}

Json to_json(const FiniteMetricSpace& space) {
  Json d = Json::array();
  for (Point x = 0; x < space.size(); ++x) {
    Json row = Json::array();
    for (Point y = 0; y < space.size(); ++y) row.push_back(space.d(x, y));
    d.push_back(std::move(row));
  }
  return Json{{"points", space.ids()}, {"metric", {{"type", "matrix"}, {"d", std::move(d)}}}};
}

Json to_json(const Cover& cover) {
  Json pieces = Json::array();
  for (const auto& piece : cover.pieces()) {
    Json ids = Json::array();
    for (Point x : piece) ids.push_back(cover.space().id(x));
    pieces.push_back(std::move(ids));
  }
  Json out{{"pieces", std::move(pieces)}};
  if (cover.coloring()) out["coloring"] = *cover.coloring();
  return out;
}

Json to_json(const PartitionOfUnity& partition) {
  Json out = Json::array();
  for (Point x = 0; x < partition.space().size(); ++x)
    for (PartitionValues::InnerIterator it(partition.values(), x); it; ++it)
      out.push_back({{"piece", it.row()}, {"point", partition.space().id(x)}, {"value", it.value()}});
  return out;
}

Json to_json(const Witness& witness) {
  const auto& space = witness.space();
  Json out = Json::array();
  for (Point x = 0; x < space.size(); ++x) {
    Json entries = Json::array();
    for (Coefficients::InnerIterator it(witness.at(x)); it; ++it) {
      const auto& e = witness.entry(it.index());
      Json entry{{"at", space.id(e.at)}, {"c", it.value()}};
      if (e.tag) entry["tag"] = *e.tag;
      entries.push_back(std::move(entry));
    }
    out.push_back({{"point", space.id(x)}, {"entries", std::move(entries)}});
  }
  return out;
}

}  // namespace coarse::io

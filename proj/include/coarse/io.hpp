#pragma once

#include "coarse/cover.hpp"
#include "coarse/group.hpp"
#include "coarse/partition.hpp"
#include "coarse/space.hpp"
#include "coarse/witness.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace coarse::io {

using Json = nlohmann::json;

/// Reads and parses a JSON file. Syntax errors become InputError with the
/// file name, line and column.
Json load_file(const std::filesystem::path& file);

/// Serializes with two-space indentation and 17 significant digits for every
/// float. Keys come out sorted, so equal documents give equal text.
std::string dump(const Json& value);

// Readers. `where` is the dotted field path used in error messages.

/// {"points": [...], "metric": {...}}, plus an optional "restrict": [ids]
/// keeping only the listed points.
FiniteMetricSpace read_space(const Json& j, const std::string& where = "space");
/// {"pieces": [[ids], ...], "coloring": [ints]}.
Cover read_cover(const Json& j, const SpacePtr& space, const std::string& where = "cover");
/// Triples {"piece": i, "point": id, "value": v}, either bare or under "values".
PartitionOfUnity read_partition(const Json& j, const Cover& cover, const std::string& where = "partition");
/// [{"point": id, "entries": [{"tag": t, "at": id, "c": v}, ...]}, ...], bare
/// or under "vectors". Index entries are sorted.
Witness read_witness(const Json& j, const SpacePtr& space, const std::string& where = "witness");
/// {"type": "cyclic", "n": m} | {"type": "product", "factors": [...]} |
/// {"type": "ball", "generators": [letters], "radius": N}.
GroupModel read_group(const Json& j, const std::string& where = "group");
/// {"type": "isometric_hom", "rule": {"translate": [weights]} | "identity"} |
/// {"type": "perturbed", "base": action, "perturbation_table": [[offsets]] |
/// {"amplitude": a, "seed": s}} | {"type": "table", "maps": {label: [ids]}}.
ActionMaps read_action(const Json& j, const GroupModel& group, const FiniteMetricSpace& space,
                       const std::string& where = "action");

// Writers.

Json to_json(const FiniteMetricSpace& space);
Json to_json(const Cover& cover);
/// Triples in (point, piece) order, positive values only.
Json to_json(const PartitionOfUnity& partition);
Json to_json(const Witness& witness);

}  // namespace coarse::io

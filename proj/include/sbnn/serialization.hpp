#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"  // vendored single-header nlohmann::json

#include "sbnn/condensation.hpp"
#include "sbnn/network.hpp"

namespace sbnn {

using Json = nlohmann::ordered_json;

// Network document, field order fixed:
//   {"kind", "I", "H", "O", "connections": [{src, dst, weight, abcd, active}]}
// Node references are flat node indices. When a schedule is given it is
// stored under a "schedule" key: an array whose entries are either a flat
// hidden-node index or {"group": [entries...]} for a collapsed cycle.
Json network_to_json(const NetworkTopology& net,
                     const ActivationSchedule* schedule = nullptr);

struct LoadedNetwork {
  NetworkTopology net;
  ActivationSchedule schedule;
  bool has_schedule = false;
};

// Inverse of network_to_json. Throws std::invalid_argument on malformed
// documents (bad kind, connection count mismatch, out-of-range indices).
LoadedNetwork network_from_json(const Json& doc);

// File helpers. Writes go to "<path>.tmp" first and are renamed into
// place, so readers never observe a half-written file.
void atomic_write_text(const std::filesystem::path& path, const std::string& text);
void save_json(const std::filesystem::path& path, const Json& doc);
Json load_json(const std::filesystem::path& path);

// Shortest representation that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace sbnn

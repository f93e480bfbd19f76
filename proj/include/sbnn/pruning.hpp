#pragma once

#include <cstddef>
#include <vector>

#include "sbnn/network.hpp"

namespace sbnn {

struct PruneEvent {
  int episode = 0;      // episode index after which the prune ran
  double rate = 0.0;    // requested rate in percent of all connections
  double threshold = 0.0;  // largest |weight| actually removed (0 if none)
  int removed = 0;
};

// Deactivates the floor(rate/100 * C) smallest-magnitude connections, where
// C counts *all* connections of the network. Ties are broken in canonical
// connection order (earlier connections pruned first). If some connections
// are already inactive they count toward the target, so pruning twice with
// the same rate removes nothing the second time.
PruneEvent global_magnitude_prune(NetworkTopology& net, double rate_percent,
                                  int episode = 0);

// Indices (into net.connections) of the active connections that lie on some
// input-to-output walk: src reachable from an input and dst able to reach an
// output, both along active connections. Connections that only feed dead
// ends, or cycles cut off from the inputs or outputs, are excluded.
std::vector<std::size_t> working_connections(const NetworkTopology& net);

// Shape of the working subnetwork.
//   ZeroLayer:   no hidden node carries signal; inputs drive outputs directly
//   SingleLayer: every working hidden node reads inputs directly and writes
//                outputs directly, and no hidden node feeds another
//   MultiLayer:  some input-to-output path crosses >= 2 distinct hidden nodes
//   Mixed:       anything else (e.g. hidden->hidden links but depth 1 paths)
enum class StructureClass : std::uint8_t { ZeroLayer, SingleLayer, MultiLayer, Mixed };

struct StructureReport {
  StructureClass cls = StructureClass::ZeroLayer;
  int depth = 0;  // most hidden nodes on any simple input-to-output working path
};

StructureReport classify_structure(const NetworkTopology& net);

const char* structure_name(StructureClass cls);

}  // namespace sbnn

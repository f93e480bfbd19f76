#include "sbnn/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace sbnn {

PruneEvent global_magnitude_prune(NetworkTopology& net, double rate_percent,
                                  int episode) {
  if (!(rate_percent >= 0.0 && rate_percent <= 100.0))
    throw std::invalid_argument("pruning rate must be in [0, 100]");
  const auto total = static_cast<double>(net.connections.size());
  const int target = static_cast<int>(std::floor(rate_percent * total / 100.0));

  std::vector<std::size_t> active;
  active.reserve(net.connections.size());
  for (std::size_t i = 0; i < net.connections.size(); ++i)
    if (net.connections[i].active) active.push_back(i);

  const int already_inactive =
      static_cast<int>(net.connections.size()) - static_cast<int>(active.size());
  const int to_remove = std::max(0, target - already_inactive);

  // Stable sort keeps canonical connection order among equal magnitudes,
  // so ties are pruned lowest-index first.
  std::stable_sort(active.begin(), active.end(),
                   [&](std::size_t a, std::size_t b) {
                     return std::abs(net.connections[a].weight) <
                            std::abs(net.connections[b].weight);
                   });

  PruneEvent event{episode, rate_percent, 0.0, to_remove};
  for (int k = 0; k < to_remove; ++k) {
    Connection& c = net.connections[active[static_cast<std::size_t>(k)]];
    c.active = false;
    event.threshold = std::abs(c.weight);
  }
  return event;
}

namespace {

// Reachability over active connections; `reversed` walks edges backwards.
std::vector<char> reach(const NetworkTopology& net, const std::vector<int>& seeds,
                        bool reversed) {
  const auto n = static_cast<std::size_t>(net.node_count());
  std::vector<std::vector<int>> adj(n);
  for (const Connection& c : net.connections) {
    if (!c.active) continue;
    if (reversed)
      adj[static_cast<std::size_t>(c.dst.index)].push_back(c.src.index);
    else
      adj[static_cast<std::size_t>(c.src.index)].push_back(c.dst.index);
  }
  std::vector<char> seen(n, 0);
  std::vector<int> stack(seeds);
  for (int s : seeds) seen[static_cast<std::size_t>(s)] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace

std::vector<std::size_t> working_connections(const NetworkTopology& net) {
  std::vector<int> inputs, outputs;
  for (int i = 0; i < net.node_count(); ++i) {
    if (net.is_input(i)) inputs.push_back(i);
    if (net.is_output(i)) outputs.push_back(i);
  }
  const std::vector<char> from_input = reach(net, inputs, false);
  const std::vector<char> to_output = reach(net, outputs, true);

  std::vector<std::size_t> working;
  for (std::size_t i = 0; i < net.connections.size(); ++i) {
    const Connection& c = net.connections[i];
    if (c.active && from_input[static_cast<std::size_t>(c.src.index)] &&
        to_output[static_cast<std::size_t>(c.dst.index)])
      working.push_back(i);
  }
  return working;
}

namespace {

// Most hidden nodes on any simple input-to-output path of `adj`.
// Exhaustive DFS; working subgraphs of the network sizes used here are
// small and sparse, so this stays cheap.
int max_hidden_depth(const NetworkTopology& net,
                     const std::vector<std::vector<int>>& adj) {
  const auto n = static_cast<std::size_t>(net.node_count());
  std::vector<char> on_path(n, 0);
  int best = 0;

  auto dfs = [&](auto&& self, int u, int hidden_seen) -> void {
    if (net.is_output(u)) {
      best = std::max(best, hidden_seen);
      return;
    }
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (on_path[static_cast<std::size_t>(v)]) continue;
      on_path[static_cast<std::size_t>(v)] = 1;
      self(self, v, hidden_seen + (net.is_hidden(v) ? 1 : 0));
      on_path[static_cast<std::size_t>(v)] = 0;
    }
  };

  for (int i = 0; i < net.node_count(); ++i) {
    if (!net.is_input(i)) continue;
    on_path[static_cast<std::size_t>(i)] = 1;
    dfs(dfs, i, 0);
    on_path[static_cast<std::size_t>(i)] = 0;
  }
  return best;
}

}  // namespace

StructureReport classify_structure(const NetworkTopology& net) {
  const std::vector<std::size_t> working = working_connections(net);
  const auto n = static_cast<std::size_t>(net.node_count());

  std::vector<std::vector<int>> adj(n);
  std::vector<char> working_hidden(n, 0);
  bool hidden_to_hidden = false;
  std::vector<char> reads_input(n, 0), writes_output(n, 0);
  for (std::size_t i : working) {
    const Connection& c = net.connections[i];
    adj[static_cast<std::size_t>(c.src.index)].push_back(c.dst.index);
    if (net.is_hidden(c.src.index)) working_hidden[static_cast<std::size_t>(c.src.index)] = 1;
    if (net.is_hidden(c.dst.index)) working_hidden[static_cast<std::size_t>(c.dst.index)] = 1;
    if (net.is_hidden(c.src.index) && net.is_hidden(c.dst.index)) hidden_to_hidden = true;
    if (net.is_input(c.src.index) && net.is_hidden(c.dst.index))
      reads_input[static_cast<std::size_t>(c.dst.index)] = 1;
    if (net.is_hidden(c.src.index) && net.is_output(c.dst.index))
      writes_output[static_cast<std::size_t>(c.src.index)] = 1;
  }

  const bool any_hidden =
      std::any_of(working_hidden.begin(), working_hidden.end(), [](char b) { return b != 0; });
  if (!any_hidden) return {StructureClass::ZeroLayer, 0};

  if (!hidden_to_hidden) {
    bool clean = true;
    for (std::size_t i = 0; i < n; ++i)
      if (working_hidden[i] && !(reads_input[i] && writes_output[i])) clean = false;
    if (clean) return {StructureClass::SingleLayer, 1};
  }

  const int depth = max_hidden_depth(net, adj);
  if (depth >= 2) return {StructureClass::MultiLayer, depth};
  return {StructureClass::Mixed, depth};
}

const char* structure_name(StructureClass cls) {
  switch (cls) {
    case StructureClass::ZeroLayer: return "zero_layer";
    case StructureClass::SingleLayer: return "single_layer";
    case StructureClass::MultiLayer: return "multi_layer";
    case StructureClass::Mixed: return "mixed";
  }
  return "unknown";
}

}  // namespace sbnn

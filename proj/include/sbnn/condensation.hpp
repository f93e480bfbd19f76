#pragma once

#include <map>
#include <utility>
#include <vector>

#include "sbnn/network.hpp"

namespace sbnn {

// Simple directed graph over NodeIds. Nodes and edges are kept sorted so
// that every operation on equal graphs yields equal results.
struct DirectedGraph {
  std::vector<NodeId> nodes;
  std::vector<std::pair<NodeId, NodeId>> edges;

  void normalize();  // sort + dedupe nodes and edges

  friend bool operator==(const DirectedGraph&, const DirectedGraph&) = default;
};

// Graph of the active connections of a network. Self-connections are not
// included: they feed a node its own previous activation, so they impose
// no ordering constraint between distinct nodes.
DirectedGraph active_graph(const NetworkTopology& net);

// Result of iterated cycle removal. Every fake node records which nodes it
// replaced; members may themselves be fake nodes introduced earlier, which
// is how nested cycles are represented.
struct CondensedGraph {
  DirectedGraph graph;
  std::map<NodeId, std::vector<NodeId>> cycle_history;
};

// Finds one cycle deterministically: the shortest cycle through the
// lowest-indexed node that lies on any cycle, exploring successors in
// ascending order. Returns the cycle's node set (sorted), or empty if the
// graph is acyclic.
std::vector<NodeId> find_cycle(const DirectedGraph& g);

// Repeatedly collapses a cycle into a fake node (edges into the cycle are
// redirected to the fake node, edges out of it are re-sourced from it,
// internal edges disappear) until the graph is acyclic.
CondensedGraph remove_cycles(const DirectedGraph& g);

// One entry of an activation schedule: either a single node, or a group of
// entries that stand for a collapsed cycle. Group members are stored in a
// fixed order here; execution draws a fresh random order every forward
// pass, because nodes inside a cycle have no defensible fixed order.
struct ScheduleEntry {
  NodeId node{};
  std::vector<ScheduleEntry> members;

  bool is_group() const { return !members.empty(); }

  friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

using ActivationSchedule = std::vector<ScheduleEntry>;

// Topological order of the condensed graph restricted to hidden and fake
// nodes (inputs are pure sources and outputs pure sinks, so they need no
// scheduling). Ties broken toward the smallest NodeId. Fake nodes become
// nested groups via the cycle history. Throws std::runtime_error if the
// condensed graph still contains a cycle.
ActivationSchedule topological_schedule(const CondensedGraph& g);

// All leaf nodes of a schedule in stored order; groups are expanded
// recursively. Useful for checks: a valid schedule flattens to every
// hidden node exactly once.
std::vector<NodeId> flatten_schedule(const ActivationSchedule& schedule);

}  // namespace sbnn

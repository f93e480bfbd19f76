#include "sbnn/condensation.hpp"

#include <algorithm>
#include <deque>
#include <queue>
#include <set>
#include <stdexcept>

namespace sbnn {

namespace {

std::map<NodeId, std::vector<NodeId>> adjacency(const DirectedGraph& g) {
  std::map<NodeId, std::vector<NodeId>> adj;
  for (const NodeId& n : g.nodes) adj[n];
  for (const auto& [u, v] : g.edges) adj[u].push_back(v);
  for (auto& [u, succ] : adj) std::sort(succ.begin(), succ.end());
  return adj;
}

// Shortest cycle through `start`: BFS until an edge back to `start` is
// found. Successors are visited in ascending order, so the result is
// deterministic. Returns the cycle's nodes or empty.
std::vector<NodeId> shortest_cycle_through(
    const NodeId& start, const std::map<NodeId, std::vector<NodeId>>& adj) {
  std::map<NodeId, NodeId> parent;
  std::deque<NodeId> frontier{start};
  std::set<NodeId> seen{start};
  while (!frontier.empty()) {
    NodeId u = frontier.front();
    frontier.pop_front();
    for (const NodeId& v : adj.at(u)) {
      if (v == start) {
        std::vector<NodeId> cycle{u};
        for (NodeId w = u; w != start; w = parent.at(w)) {
          if (parent.at(w) != start) cycle.push_back(parent.at(w));
        }
        cycle.push_back(start);
        std::sort(cycle.begin(), cycle.end());
        cycle.erase(std::unique(cycle.begin(), cycle.end()), cycle.end());
        return cycle;
      }
      if (seen.insert(v).second) {
        parent[v] = u;
        frontier.push_back(v);
      }
    }
  }
  return {};
}

}  // namespace

void DirectedGraph::normalize() {
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

DirectedGraph active_graph(const NetworkTopology& net) {
  DirectedGraph g;
  g.nodes.reserve(static_cast<std::size_t>(net.node_count()));
  for (int i = 0; i < net.node_count(); ++i) g.nodes.push_back(net.node(i));
  for (const Connection& c : net.connections) {
    if (c.active && c.src != c.dst) g.edges.push_back({c.src, c.dst});
  }
  g.normalize();
  return g;
}

std::vector<NodeId> find_cycle(const DirectedGraph& g) {
  const auto adj = adjacency(g);
  for (const NodeId& n : g.nodes) {  // nodes are sorted, so lowest id first
    auto cycle = shortest_cycle_through(n, adj);
    if (!cycle.empty()) return cycle;
  }
  return {};
}

CondensedGraph remove_cycles(const DirectedGraph& g) {
  CondensedGraph out;
  out.graph = g;
  out.graph.normalize();
  int next_fake = 0;
  for (;;) {
    std::vector<NodeId> cycle = find_cycle(out.graph);
    if (cycle.empty()) break;
    const NodeId fake{next_fake++, NodeKind::Fake};
    const std::set<NodeId> members(cycle.begin(), cycle.end());

    std::set<std::pair<NodeId, NodeId>> edges;
    for (const auto& [u, v] : out.graph.edges) {
      const bool u_in = members.count(u) > 0;
      const bool v_in = members.count(v) > 0;
      if (u_in && v_in) continue;  // internal edge disappears
      if (u_in)
        edges.insert({fake, v});
      else if (v_in)
        edges.insert({u, fake});
      else
        edges.insert({u, v});
    }

    std::vector<NodeId> nodes{fake};
    for (const NodeId& n : out.graph.nodes)
      if (!members.count(n)) nodes.push_back(n);

    out.graph.nodes = std::move(nodes);
    out.graph.edges.assign(edges.begin(), edges.end());
    out.graph.normalize();
    out.cycle_history[fake] = cycle;  // already sorted
  }
  return out;
}

namespace {

ScheduleEntry make_entry(const NodeId& n, const CondensedGraph& g) {
  ScheduleEntry e;
  if (n.kind == NodeKind::Fake) {
    for (const NodeId& m : g.cycle_history.at(n))
      e.members.push_back(make_entry(m, g));
  } else {
    e.node = n;
  }
  return e;
}

}  // namespace

ActivationSchedule topological_schedule(const CondensedGraph& g) {
  // Restrict to hidden and fake nodes; edges touching inputs or outputs
  // never constrain their relative order.
  std::map<NodeId, int> indegree;
  std::map<NodeId, std::vector<NodeId>> succ;
  auto schedulable = [](const NodeId& n) {
    return n.kind == NodeKind::Hidden || n.kind == NodeKind::Fake;
  };
  for (const NodeId& n : g.graph.nodes)
    if (schedulable(n)) indegree[n] = 0;
  for (const auto& [u, v] : g.graph.edges) {
    if (schedulable(u) && schedulable(v)) {
      succ[u].push_back(v);
      ++indegree[v];
    }
  }

  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<NodeId>> ready;
  for (const auto& [n, d] : indegree)
    if (d == 0) ready.push(n);

  ActivationSchedule schedule;
  std::size_t emitted = 0;
  while (!ready.empty()) {
    NodeId n = ready.top();
    ready.pop();
    schedule.push_back(make_entry(n, g));
    ++emitted;
    auto it = succ.find(n);
    if (it == succ.end()) continue;
    for (const NodeId& v : it->second)
      if (--indegree[v] == 0) ready.push(v);
  }
  if (emitted != indegree.size())
    throw std::runtime_error("topological_schedule: condensed graph still has a cycle");
  return schedule;
}

namespace {

void flatten_into(const ScheduleEntry& e, std::vector<NodeId>& out) {
  if (e.is_group()) {
    for (const ScheduleEntry& m : e.members) flatten_into(m, out);
  } else {
    out.push_back(e.node);
  }
}

}  // namespace

std::vector<NodeId> flatten_schedule(const ActivationSchedule& schedule) {
  std::vector<NodeId> out;
  for (const ScheduleEntry& e : schedule) flatten_into(e, out);
  return out;
}

}  // namespace sbnn

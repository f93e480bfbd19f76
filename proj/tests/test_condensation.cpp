#include <algorithm>
#include <set>

#include "doctest.h"
#include "graph_testutil.hpp"
#include "sbnn/condensation.hpp"
#include "sbnn/network.hpp"
#include "sbnn/pruning.hpp"
#include "sbnn/rng.hpp"

using namespace sbnn;

namespace {

NodeId hid(int i) { return {i, NodeKind::Hidden}; }
NodeId fake(int i) { return {i, NodeKind::Fake}; }

DirectedGraph graph_of(std::vector<NodeId> nodes,
                       std::vector<std::pair<NodeId, NodeId>> edges) {
  DirectedGraph g{std::move(nodes), std::move(edges)};
  g.normalize();
  return g;
}

}  // namespace

TEST_CASE("find_cycle on a two-node loop returns both nodes") {
  const DirectedGraph g =
      graph_of({hid(0), hid(1)}, {{hid(0), hid(1)}, {hid(1), hid(0)}});
  CHECK(find_cycle(g) == std::vector<NodeId>{hid(0), hid(1)});
}

TEST_CASE("find_cycle on acyclic graphs returns nothing") {
  const DirectedGraph chain =
      graph_of({hid(0), hid(1), hid(2)}, {{hid(0), hid(1)}, {hid(1), hid(2)}});
  CHECK(find_cycle(chain).empty());
  CHECK(find_cycle(DirectedGraph{}).empty());
}

TEST_CASE("find_cycle prefers the shortest cycle through the lowest node") {
  // 0 -> 1 -> 2 -> 0 (length 3) and 1 <-> 2 (length 2). The lowest node on
  // any cycle is 0, so the triangle wins over the shorter remote loop.
  const DirectedGraph g = graph_of(
      {hid(0), hid(1), hid(2)},
      {{hid(0), hid(1)}, {hid(1), hid(2)}, {hid(2), hid(0)}, {hid(2), hid(1)}});
  CHECK(find_cycle(g) == std::vector<NodeId>{hid(0), hid(1), hid(2)});
}

TEST_CASE("collapsing an inner loop exposes an outer one: nested history") {
  // input 0; hidden 1, 2, 3; output 4. Node 1 and 2 form a tight loop, and
  // node 3 forms a loop with it: condensing {1,2} first creates a fake
  // node that then loops with 3, so the second fake nests the first.
  const NodeId in{0, NodeKind::Input}, out{4, NodeKind::Output};
  const DirectedGraph g = graph_of({in, hid(1), hid(2), hid(3), out},
                                   {{in, hid(3)},
                                    {in, hid(1)},
                                    {hid(3), hid(1)},
                                    {hid(1), hid(3)},
                                    {hid(1), hid(2)},
                                    {hid(2), hid(1)},
                                    {hid(2), out},
                                    {hid(3), out}});

  const CondensedGraph c = remove_cycles(g);

  REQUIRE(c.cycle_history.size() == 2);
  CHECK(c.cycle_history.at(fake(0)) == std::vector<NodeId>{hid(1), hid(2)});
  CHECK(c.cycle_history.at(fake(1)) == std::vector<NodeId>{fake(0), hid(3)});

  const DirectedGraph expected =
      graph_of({in, fake(1), out}, {{in, fake(1)}, {fake(1), out}});
  CHECK(c.graph == expected);

  // The schedule is one doubly nested group that flattens to all hidden.
  const ActivationSchedule schedule = topological_schedule(c);
  REQUIRE(schedule.size() == 1);
  REQUIRE(schedule[0].is_group());
  REQUIRE(schedule[0].members.size() == 2);
  CHECK(schedule[0].members[0].is_group());
  CHECK(schedule[0].members[0].members.size() == 2);
  CHECK_FALSE(schedule[0].members[1].is_group());
  CHECK(flatten_schedule(schedule) == std::vector<NodeId>{hid(1), hid(2), hid(3)});
}

TEST_CASE("a fully connected clique condenses to a single node") {
  DirectedGraph g;
  for (int i = 0; i < 4; ++i) g.nodes.push_back(hid(i));
  for (int u = 0; u < 4; ++u)
    for (int v = 0; v < 4; ++v)
      if (u != v) g.edges.push_back({hid(u), hid(v)});
  g.normalize();

  const CondensedGraph c = remove_cycles(g);
  REQUIRE(c.graph.nodes.size() == 1);
  CHECK(c.graph.nodes[0].kind == NodeKind::Fake);
  CHECK(c.graph.edges.empty());

  // Every original node sits exactly once inside the (nested) history.
  std::vector<NodeId> members;
  testutil::expand_node(c.graph.nodes[0], c.cycle_history, members);
  std::sort(members.begin(), members.end());
  CHECK(members == std::vector<NodeId>{hid(0), hid(1), hid(2), hid(3)});
}

TEST_CASE("condensation invariants hold on random digraphs") {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(13));
    const DirectedGraph g = testutil::random_digraph(rng, n, rng.uniform(0.05, 0.5));
    const CondensedGraph c = remove_cycles(g);

    CHECK_FALSE(testutil::has_cycle(c.graph));

    // determinism: condensing the same graph again gives the same result
    const CondensedGraph c2 = remove_cycles(g);
    CHECK(c.graph == c2.graph);
    CHECK(c.cycle_history == c2.cycle_history);

    // node conservation through the history
    std::vector<NodeId> expanded;
    for (const NodeId& node : c.graph.nodes)
      testutil::expand_node(node, c.cycle_history, expanded);
    std::sort(expanded.begin(), expanded.end());
    CHECK(expanded == g.nodes);

    // reachability between surviving original nodes is preserved
    const auto orig_closure = testutil::closure(g);
    const auto cond_closure = testutil::closure(c.graph);
    const auto orig_idx = testutil::index_nodes(g);
    const auto cond_idx = testutil::index_nodes(c.graph);
    for (const NodeId& u : c.graph.nodes) {
      if (u.kind == NodeKind::Fake) continue;
      for (const NodeId& v : c.graph.nodes) {
        if (v.kind == NodeKind::Fake) continue;
        const bool before = orig_closure[orig_idx.at(u)][orig_idx.at(v)];
        const bool after = cond_closure[cond_idx.at(u)][cond_idx.at(v)];
        CHECK(before == after);
      }
    }
  }
}

TEST_CASE("feedforward networks schedule hidden nodes in ascending order") {
  const NetworkTopology net = build_ffnn_topology(3, 4, 2);
  const ActivationSchedule schedule =
      topological_schedule(remove_cycles(active_graph(net)));
  REQUIRE(schedule.size() == 4);
  for (int k = 0; k < 4; ++k) {
    CHECK_FALSE(schedule[static_cast<std::size_t>(k)].is_group());
    CHECK(schedule[static_cast<std::size_t>(k)].node == hid(3 + k));
  }
}

TEST_CASE("active_graph drops self-connections and inactive connections") {
  NetworkTopology net = build_sbnn_topology(1, 2, 1);
  const DirectedGraph g = active_graph(net);
  for (const auto& [u, v] : g.edges) CHECK(u != v);
  CHECK(static_cast<int>(g.nodes.size()) == net.node_count());

  for (Connection& c : net.connections) c.active = false;
  CHECK(active_graph(net).edges.empty());
}

TEST_CASE("schedules of randomly pruned networks cover hidden nodes and respect edges") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    NetworkTopology net = build_sbnn_topology(2, 5, 2);
    for (Connection& c : net.connections) {
      c.weight = rng.normal();
      c.active = rng.uniform01() < 0.6;
    }
    const CondensedGraph cond = remove_cycles(active_graph(net));
    const ActivationSchedule schedule = topological_schedule(cond);

    // every hidden node appears exactly once after flattening
    std::vector<NodeId> flat = flatten_schedule(schedule);
    std::sort(flat.begin(), flat.end());
    std::vector<NodeId> expected;
    for (int h = 0; h < net.hidden; ++h) expected.push_back(hid(net.inputs + h));
    CHECK(flat == expected);

    // condensed edges among scheduled nodes go strictly forward
    std::map<NodeId, std::size_t> entry_of;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      for (const NodeId& leaf : flatten_schedule({schedule[i]})) entry_of[leaf] = i;
    }
    for (const auto& [u, v] : cond.graph.edges) {
      std::vector<NodeId> from, to;
      testutil::expand_node(u, cond.cycle_history, from);
      testutil::expand_node(v, cond.cycle_history, to);
      if (from.front().kind != NodeKind::Hidden) continue;
      if (to.front().kind != NodeKind::Hidden) continue;
      CHECK(entry_of.at(from.front()) < entry_of.at(to.front()));
    }
  }
}

TEST_CASE("a condensed graph that still cycles is rejected by the scheduler") {
  CondensedGraph bogus;
  bogus.graph =
      graph_of({hid(0), hid(1)}, {{hid(0), hid(1)}, {hid(1), hid(0)}});
  CHECK_THROWS_AS(topological_schedule(bogus), std::runtime_error);
}

TEST_CASE("isolated hidden nodes are still scheduled") {
  NetworkTopology net = build_sbnn_topology(1, 3, 1);
  for (Connection& c : net.connections) c.active = false;
  const ActivationSchedule schedule =
      topological_schedule(remove_cycles(active_graph(net)));
  CHECK(flatten_schedule(schedule) ==
        std::vector<NodeId>{hid(1), hid(2), hid(3)});
}

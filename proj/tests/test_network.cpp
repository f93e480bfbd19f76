#include <set>
#include <utility>

#include "doctest.h"
#include "sbnn/network.hpp"
#include "sbnn/rng.hpp"

using namespace sbnn;

TEST_CASE("connection counts match the closed forms") {
  CHECK(sbnn_connection_count(2, 3, 3) == 30);
  CHECK(sbnn_connection_count(8, 5, 4) == 117);
  CHECK(sbnn_connection_count(4, 3, 2) == 35);   // cartpole, 3 hidden
  CHECK(sbnn_connection_count(2, 3, 3) == 30);   // mountaincar, 3 hidden
  CHECK(sbnn_connection_count(1, 0, 1) == 1);    // no hidden: direct wire only
  CHECK(ffnn_connection_count(8, 9, 4) == 108);
  CHECK(ffnn_connection_count(2, 4, 3) == 20);
  CHECK(ffnn_connection_count(4, 3, 2) == 18);
}

TEST_CASE("genome lengths: 4 coefficients per sbnn connection, 1 weight per ffnn") {
  CHECK(genome_length(build_sbnn_topology(2, 3, 3)) == 120);
  CHECK(genome_length(build_sbnn_topology(4, 3, 2)) == 140);
  CHECK(genome_length(build_ffnn_topology(4, 3, 2)) == 18);
}

TEST_CASE("bad dimensions are rejected") {
  CHECK_THROWS_AS(build_sbnn_topology(0, 3, 2), std::invalid_argument);
  CHECK_THROWS_AS(build_sbnn_topology(2, -1, 2), std::invalid_argument);
  CHECK_THROWS_AS(build_ffnn_topology(2, 3, 0), std::invalid_argument);
}

namespace {

void check_topology_invariants(const NetworkTopology& net) {
  const int expected = net.kind == NetworkKind::Sbnn
                           ? sbnn_connection_count(net.inputs, net.hidden, net.outputs)
                           : ffnn_connection_count(net.inputs, net.hidden, net.outputs);
  REQUIRE(static_cast<int>(net.connections.size()) == expected);

  std::set<std::pair<int, int>> seen;
  std::pair<int, int> prev{-1, -1};
  for (const Connection& c : net.connections) {
    // canonical order, no duplicates
    const std::pair<int, int> key{c.src.index, c.dst.index};
    CHECK(prev < key);
    prev = key;
    CHECK(seen.insert(key).second);

    // kinds agree with the index ranges
    CHECK(c.src.kind == net.kind_of(c.src.index));
    CHECK(c.dst.kind == net.kind_of(c.dst.index));

    // outputs never source a connection, inputs never receive one
    CHECK(c.src.kind != NodeKind::Output);
    CHECK(c.dst.kind != NodeKind::Input);

    // self-connections exist only on sbnn hidden nodes
    if (c.src.index == c.dst.index) {
      CHECK(net.kind == NetworkKind::Sbnn);
      CHECK(c.src.kind == NodeKind::Hidden);
    }
    if (net.kind == NetworkKind::Ffnn) {
      const bool ih = c.src.kind == NodeKind::Input && c.dst.kind == NodeKind::Hidden;
      const bool ho = c.src.kind == NodeKind::Hidden && c.dst.kind == NodeKind::Output;
      CHECK((ih || ho));
    }

    CHECK(c.active);
    CHECK(c.weight == 0.0);
  }

  if (net.kind == NetworkKind::Sbnn) {
    // every hidden pair is present, including the diagonal
    for (int a = 0; a < net.hidden; ++a)
      for (int b = 0; b < net.hidden; ++b)
        CHECK(seen.count({net.inputs + a, net.inputs + b}) == 1);
  }
}

}  // namespace

TEST_CASE("built topologies satisfy the structural invariants over a grid") {
  for (int i = 1; i <= 6; ++i)
    for (int h = 0; h <= 8; ++h)
      for (int o = 1; o <= 6; ++o) {
        check_topology_invariants(build_sbnn_topology(i, h, o));
        check_topology_invariants(build_ffnn_topology(i, h, o));
      }
}

TEST_CASE("apply/extract genome round-trips in canonical order") {
  Rng rng(5);

  NetworkTopology sb = build_sbnn_topology(3, 4, 2);
  Eigen::VectorXd g(genome_length(sb));
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.normal();
  apply_genome(sb, g);
  CHECK(extract_genome(sb) == g);
  // sbnn genomes set coefficients; weights stay zero until the Hebbian rule
  for (const Connection& c : sb.connections) CHECK(c.weight == 0.0);
  // block layout: connection k owns genome slots [4k, 4k+4)
  CHECK(sb.connections[3].abcd[0] == g[12]);
  CHECK(sb.connections[3].abcd[3] == g[15]);

  NetworkTopology ff = build_ffnn_topology(3, 4, 2);
  Eigen::VectorXd w(genome_length(ff));
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng.normal();
  apply_genome(ff, w);
  CHECK(extract_genome(ff) == w);
  CHECK(ff.connections[5].weight == w[5]);
}

TEST_CASE("genome length mismatches are rejected") {
  NetworkTopology net = build_sbnn_topology(2, 2, 2);
  CHECK_THROWS_AS(apply_genome(net, Eigen::VectorXd::Zero(7)), std::invalid_argument);
  NetworkTopology ff = build_ffnn_topology(2, 2, 2);
  CHECK_THROWS_AS(apply_genome(ff, Eigen::VectorXd::Zero(9)), std::invalid_argument);
}

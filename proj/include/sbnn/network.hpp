#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace sbnn {

enum class NodeKind : std::uint8_t { Input, Hidden, Output, Fake };

// Handle for a network node. `index` is the flat node index: inputs occupy
// [0, I), hidden [I, I+H), outputs [I+H, I+H+O). Fake nodes only appear
// during graph condensation and use their own index space starting at 0.
struct NodeId {
  int index = 0;
  NodeKind kind = NodeKind::Hidden;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

struct Connection {
  NodeId src;
  NodeId dst;
  double weight = 0.0;
  std::array<double, 4> abcd{};  // Hebbian coefficients (A, B, C, D)
  bool active = true;
};

enum class NetworkKind : std::uint8_t { Sbnn, Ffnn };

// Dense network over a fixed node set. Connections are kept in canonical
// order: sorted by (src index, dst index). Genomes rely on this ordering.
struct NetworkTopology {
  NetworkKind kind = NetworkKind::Sbnn;
  int inputs = 0;
  int hidden = 0;
  int outputs = 0;
  std::vector<Connection> connections;

  int node_count() const { return inputs + hidden + outputs; }
  bool is_input(int node) const { return node < inputs; }
  bool is_hidden(int node) const {
    return node >= inputs && node < inputs + hidden;
  }
  bool is_output(int node) const {
    return node >= inputs + hidden && node < node_count();
  }
  NodeKind kind_of(int node) const {
    if (is_input(node)) return NodeKind::Input;
    if (is_hidden(node)) return NodeKind::Hidden;
    return NodeKind::Output;
  }
  NodeId node(int index) const { return NodeId{index, kind_of(index)}; }
};

// Connection counts for the two architectures.
//
// The self-building network wires input->hidden, input->output,
// hidden->hidden (all ordered pairs, including each hidden node's
// self-connection) and hidden->output:
//   H^2 + H*(I+O) + I*O
// The feedforward baseline has one hidden layer: I*H + H*O.
int sbnn_connection_count(int inputs, int hidden, int outputs);
int ffnn_connection_count(int inputs, int hidden, int outputs);

// Build a topology with all weights zero and all connections active,
// in canonical order.
NetworkTopology build_sbnn_topology(int inputs, int hidden, int outputs);
NetworkTopology build_ffnn_topology(int inputs, int hidden, int outputs);

// Genome layout, following canonical connection order:
//   sbnn: one (A, B, C, D) block per connection, length 4 * connections
//   ffnn: one weight per connection, length connections
int genome_length(const NetworkTopology& net);
void apply_genome(NetworkTopology& net, const Eigen::VectorXd& genome);
Eigen::VectorXd extract_genome(const NetworkTopology& net);

}  // namespace sbnn

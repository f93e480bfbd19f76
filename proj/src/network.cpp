#include "sbnn/network.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace sbnn {

namespace {

void check_dims(int inputs, int hidden, int outputs) {
  if (inputs < 1 || outputs < 1)
    throw std::invalid_argument("network needs at least one input and one output");
  if (hidden < 0) throw std::invalid_argument("hidden node count must be >= 0");
}

void sort_canonical(std::vector<Connection>& conns) {
  std::sort(conns.begin(), conns.end(), [](const Connection& a, const Connection& b) {
    if (a.src.index != b.src.index) return a.src.index < b.src.index;
    return a.dst.index < b.dst.index;
  });
}

}  // namespace

int sbnn_connection_count(int inputs, int hidden, int outputs) {
  check_dims(inputs, hidden, outputs);
  return hidden * hidden + hidden * (inputs + outputs) + inputs * outputs;
}

int ffnn_connection_count(int inputs, int hidden, int outputs) {
  check_dims(inputs, hidden, outputs);
  return inputs * hidden + hidden * outputs;
}

NetworkTopology build_sbnn_topology(int inputs, int hidden, int outputs) {
  check_dims(inputs, hidden, outputs);
  NetworkTopology net{NetworkKind::Sbnn, inputs, hidden, outputs, {}};
  net.connections.reserve(static_cast<std::size_t>(sbnn_connection_count(inputs, hidden, outputs)));
  const int h0 = inputs;            // first hidden index
  const int o0 = inputs + hidden;   // first output index
  for (int i = 0; i < inputs; ++i) {
    for (int h = 0; h < hidden; ++h)
      net.connections.push_back({net.node(i), net.node(h0 + h)});
    for (int o = 0; o < outputs; ++o)
      net.connections.push_back({net.node(i), net.node(o0 + o)});
  }
  // Hidden block is all ordered pairs, self-connections included; a
  // self-connection feeds a node its own previous activation.
  for (int a = 0; a < hidden; ++a) {
    for (int b = 0; b < hidden; ++b)
      net.connections.push_back({net.node(h0 + a), net.node(h0 + b)});
    for (int o = 0; o < outputs; ++o)
      net.connections.push_back({net.node(h0 + a), net.node(o0 + o)});
  }
  sort_canonical(net.connections);
  return net;
}

NetworkTopology build_ffnn_topology(int inputs, int hidden, int outputs) {
  check_dims(inputs, hidden, outputs);
  NetworkTopology net{NetworkKind::Ffnn, inputs, hidden, outputs, {}};
  net.connections.reserve(static_cast<std::size_t>(ffnn_connection_count(inputs, hidden, outputs)));
  const int h0 = inputs;
  const int o0 = inputs + hidden;
  for (int i = 0; i < inputs; ++i)
    for (int h = 0; h < hidden; ++h)
      net.connections.push_back({net.node(i), net.node(h0 + h)});
  for (int h = 0; h < hidden; ++h)
    for (int o = 0; o < outputs; ++o)
      net.connections.push_back({net.node(h0 + h), net.node(o0 + o)});
  sort_canonical(net.connections);
  return net;
}

int genome_length(const NetworkTopology& net) {
  const int c = static_cast<int>(net.connections.size());
  return net.kind == NetworkKind::Sbnn ? 4 * c : c;
}

void apply_genome(NetworkTopology& net, const Eigen::VectorXd& genome) {
  if (genome.size() != genome_length(net))
    throw std::invalid_argument("genome length " + std::to_string(genome.size()) +
                                " does not match network (expected " +
                                std::to_string(genome_length(net)) + ")");
  if (net.kind == NetworkKind::Sbnn) {
    for (std::size_t i = 0; i < net.connections.size(); ++i) {
      Connection& c = net.connections[i];
      for (int k = 0; k < 4; ++k) c.abcd[static_cast<std::size_t>(k)] = genome[static_cast<Eigen::Index>(4 * i) + k];
      c.weight = 0.0;  // weights start at zero and are grown by the Hebbian rule
    }
  } else {
    for (std::size_t i = 0; i < net.connections.size(); ++i)
      net.connections[i].weight = genome[static_cast<Eigen::Index>(i)];
  }
}

Eigen::VectorXd extract_genome(const NetworkTopology& net) {
  Eigen::VectorXd g(genome_length(net));
  if (net.kind == NetworkKind::Sbnn) {
    for (std::size_t i = 0; i < net.connections.size(); ++i)
      for (int k = 0; k < 4; ++k)
        g[static_cast<Eigen::Index>(4 * i) + k] = net.connections[i].abcd[static_cast<std::size_t>(k)];
  } else {
    for (std::size_t i = 0; i < net.connections.size(); ++i)
      g[static_cast<Eigen::Index>(i)] = net.connections[i].weight;
  }
  return g;
}

}  // namespace sbnn

#pragma once

#include <Eigen/Core>

#include "sbnn/network.hpp"

namespace sbnn {

struct HebbianConfig {
  double eta = 0.1;     // learning rate applied to every ABCD update
  bool enabled = true;  // turned off permanently once the network is pruned
};

// One ABCD Hebbian update over all active connections:
//   w += eta * (A * a_src + B * a_dst + C * a_src * a_dst + D)
// `activations` is the activation buffer snapshot taken after a forward
// pass; every connection reads the same snapshot, so update order does not
// matter. Throws std::logic_error if plasticity is disabled.
void hebbian_step(NetworkTopology& net, const Eigen::VectorXd& activations,
                  const HebbianConfig& cfg);

}  // namespace sbnn

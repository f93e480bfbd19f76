#include "sbnn/plasticity.hpp"

#include <stdexcept>

namespace sbnn {

void hebbian_step(NetworkTopology& net, const Eigen::VectorXd& activations,
                  const HebbianConfig& cfg) {
  if (!cfg.enabled)
    throw std::logic_error("hebbian_step called with plasticity disabled");
  if (activations.size() != net.node_count())
    throw std::invalid_argument("activation buffer size does not match network");
  for (Connection& c : net.connections) {
    if (!c.active) continue;
    const double a_src = activations[c.src.index];
    const double a_dst = activations[c.dst.index];
    c.weight += cfg.eta * (c.abcd[0] * a_src + c.abcd[1] * a_dst +
                           c.abcd[2] * a_src * a_dst + c.abcd[3]);
  }
}

}  // namespace sbnn

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "sbnn/condensation.hpp"
#include "sbnn/environment.hpp"
#include "sbnn/network.hpp"
#include "sbnn/plasticity.hpp"
#include "sbnn/pruning.hpp"
#include "sbnn/rng.hpp"

namespace sbnn {

// Activation buffer plus the random stream that orders hidden updates.
// The buffer persists across timesteps within an episode (nodes may read
// values their sources wrote on the previous step) and is zeroed when a
// new episode starts.
struct ActivationState {
  Eigen::VectorXd values;
  Rng rng;

  ActivationState(int node_count, std::uint64_t seed)
      : values(Eigen::VectorXd::Zero(node_count)), rng(seed) {}

  void start_episode(std::uint64_t seed) {
    values.setZero();
    rng = Rng(seed);
  }
};

// Executable form of an ActivationSchedule. Group member orders are stored
// in reusable buffers and reshuffled on every pass, so repeated execution
// allocates nothing.
class CompiledSchedule {
 public:
  CompiledSchedule() = default;
  explicit CompiledSchedule(const ActivationSchedule& schedule);

  // Calls f(node_index) for every leaf, outer entries in schedule order,
  // group members in a fresh random order drawn from rng (inner groups
  // reshuffled each time they are reached).
  template <typename F>
  void for_each_node(Rng& rng, F&& f) {
    for (int r : roots_) visit(r, rng, f);
  }

  bool empty() const { return roots_.empty(); }

 private:
  struct Node {
    int node_index = -1;         // leaf payload; -1 for groups
    std::vector<int> children;   // indices into nodes_, shuffled in place
  };

  int build(const ScheduleEntry& e);

  template <typename F>
  void visit(int id, Rng& rng, F&& f) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.children.empty()) {
      f(n.node_index);
      return;
    }
    // Restore build order first so the draw depends only on the rng state,
    // not on the previous pass.
    std::sort(n.children.begin(), n.children.end());
    rng.shuffle(n.children);
    for (int c : n.children) visit(c, rng, f);
  }

  std::vector<Node> nodes_;
  std::vector<int> roots_;
};

// Forward passes over a network, reading and writing an ActivationState.
// Keeps per-node lists of incoming active connections; call refresh()
// after pruning. Both passes write tanh(observation) into the input slots,
// update hidden nodes one at a time (each sees the buffer as its
// predecessors left it), then compute the outputs.
class ForwardPass {
 public:
  explicit ForwardPass(const NetworkTopology& net);

  void refresh();
  void set_schedule(const ActivationSchedule& schedule);

  // Hidden nodes in a freshly drawn random permutation (dense phase).
  void dense(const Eigen::VectorXd& observation, ActivationState& state);

  // Hidden nodes in the compiled schedule order (pruned phase).
  void scheduled(const Eigen::VectorXd& observation, ActivationState& state);

 private:
  void load_inputs(const Eigen::VectorXd& observation, ActivationState& state);
  void update_node(int node, ActivationState& state);
  void update_outputs(ActivationState& state);

  const NetworkTopology* net_;
  struct Incoming {
    int src;
    int connection;
  };
  std::vector<std::vector<Incoming>> incoming_;
  std::vector<int> hidden_order_;
  CompiledSchedule compiled_;
};

// Index of the largest output activation among `allowed` (any order);
// ties go to the smallest index.
int select_action(const Eigen::Ref<const Eigen::VectorXd>& outputs,
                  const std::vector<int>& allowed);

struct StepRecord {
  int action = 0;
  double reward = 0.0;
  bool terminated = false;
};

// A network wired to act: runs forward passes, picks actions, applies the
// Hebbian update while plasticity lasts, and switches to the condensed
// schedule once pruned.
class Agent {
 public:
  Agent(NetworkTopology net, HebbianConfig plasticity);

  // The forward pass caches point into net_, so the agent stays put.
  Agent(const Agent&) = delete;
  Agent& operator=(const Agent&) = delete;

  void start_episode(std::uint64_t shuffle_seed);

  // Forward pass -> action -> environment step -> Hebbian update (if
  // plasticity is on). The observation consumed is env.observation().
  StepRecord step(Environment& env);

  // Prunes, computes the condensed schedule, and turns plasticity off for
  // good. Returns what the prune did.
  PruneEvent prune_and_freeze(double rate_percent, int episode);

  // Freeze without pruning: schedule the graph as-is (used for networks
  // loaded from disk whose active flags are already final).
  void freeze();
  void freeze_with_schedule(ActivationSchedule schedule);

  const NetworkTopology& network() const { return net_; }
  const ActivationSchedule& schedule() const { return schedule_; }
  const Eigen::VectorXd& activations() const { return state_.values; }
  bool frozen() const { return frozen_; }

 private:
  NetworkTopology net_;
  HebbianConfig plasticity_;
  ForwardPass pass_;
  ActivationSchedule schedule_;
  ActivationState state_;
  bool frozen_ = false;
};

}  // namespace sbnn

#include "sbnn/activation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sbnn {

CompiledSchedule::CompiledSchedule(const ActivationSchedule& schedule) {
  for (const ScheduleEntry& e : schedule) roots_.push_back(build(e));
}

int CompiledSchedule::build(const ScheduleEntry& e) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  if (e.is_group()) {
    std::vector<int> children;
    children.reserve(e.members.size());
    for (const ScheduleEntry& m : e.members) children.push_back(build(m));
    nodes_[static_cast<std::size_t>(id)].children = std::move(children);
  } else {
    nodes_[static_cast<std::size_t>(id)].node_index = e.node.index;
  }
  return id;
}

ForwardPass::ForwardPass(const NetworkTopology& net) : net_(&net) {
  refresh();
}

void ForwardPass::refresh() {
  incoming_.assign(static_cast<std::size_t>(net_->node_count()), {});
  for (std::size_t i = 0; i < net_->connections.size(); ++i) {
    const Connection& c = net_->connections[i];
    if (c.active)
      incoming_[static_cast<std::size_t>(c.dst.index)].push_back(
          {c.src.index, static_cast<int>(i)});
  }
  hidden_order_.resize(static_cast<std::size_t>(net_->hidden));
}

void ForwardPass::set_schedule(const ActivationSchedule& schedule) {
  compiled_ = CompiledSchedule(schedule);
}

void ForwardPass::load_inputs(const Eigen::VectorXd& observation,
                              ActivationState& state) {
  if (observation.size() != net_->inputs)
    throw std::invalid_argument("observation size does not match network inputs");
  for (int i = 0; i < net_->inputs; ++i)
    state.values[i] = std::tanh(observation[i]);
}

void ForwardPass::update_node(int node, ActivationState& state) {
  double sum = 0.0;
  for (const Incoming& in : incoming_[static_cast<std::size_t>(node)])
    sum += net_->connections[static_cast<std::size_t>(in.connection)].weight *
           state.values[in.src];
  state.values[node] = std::tanh(sum);
}

void ForwardPass::update_outputs(ActivationState& state) {
  for (int o = net_->inputs + net_->hidden; o < net_->node_count(); ++o)
    update_node(o, state);
}

void ForwardPass::dense(const Eigen::VectorXd& observation, ActivationState& state) {
  load_inputs(observation, state);
  for (int h = 0; h < net_->hidden; ++h)
    hidden_order_[static_cast<std::size_t>(h)] = net_->inputs + h;
  state.rng.shuffle(hidden_order_);
  for (int node : hidden_order_) update_node(node, state);
  update_outputs(state);
}

void ForwardPass::scheduled(const Eigen::VectorXd& observation,
                            ActivationState& state) {
  load_inputs(observation, state);
  compiled_.for_each_node(state.rng,
                          [&](int node) { update_node(node, state); });
  update_outputs(state);
}

int select_action(const Eigen::Ref<const Eigen::VectorXd>& outputs,
                  const std::vector<int>& allowed) {
  if (allowed.empty())
    throw std::invalid_argument("select_action: empty action set");
  int best = -1;
  double best_value = 0.0;
  for (int idx : allowed) {
    if (idx < 0 || idx >= outputs.size())
      throw std::invalid_argument("select_action: action index out of range");
    const double v = outputs[idx];
    if (best < 0 || v > best_value || (v == best_value && idx < best)) {
      best = idx;
      best_value = v;
    }
  }
  return best;
}

Agent::Agent(NetworkTopology net, HebbianConfig plasticity)
    : net_(std::move(net)),
      plasticity_(plasticity),
      pass_(net_),
      state_(net_.node_count(), 0) {
  if (net_.kind == NetworkKind::Ffnn) plasticity_.enabled = false;
}

void Agent::start_episode(std::uint64_t shuffle_seed) {
  state_.start_episode(shuffle_seed);
}

StepRecord Agent::step(Environment& env) {
  if (env.spec().observation_dim != net_.inputs ||
      env.spec().action_count != net_.outputs)
    throw std::invalid_argument("environment does not match network dimensions");
  if (frozen_)
    pass_.scheduled(env.observation(), state_);
  else
    pass_.dense(env.observation(), state_);
  const int action =
      select_action(state_.values.tail(net_.outputs), env.allowed_actions());
  const StepOutcome out = env.step(action);
  if (plasticity_.enabled) hebbian_step(net_, state_.values, plasticity_);
  return {action, out.reward, out.terminated};
}

PruneEvent Agent::prune_and_freeze(double rate_percent, int episode) {
  if (frozen_) throw std::logic_error("network is already pruned and frozen");
  const PruneEvent event = global_magnitude_prune(net_, rate_percent, episode);
  freeze();
  return event;
}

void Agent::freeze() {
  freeze_with_schedule(topological_schedule(remove_cycles(active_graph(net_))));
}

void Agent::freeze_with_schedule(ActivationSchedule schedule) {
  schedule_ = std::move(schedule);
  pass_.refresh();
  pass_.set_schedule(schedule_);
  plasticity_.enabled = false;
  frozen_ = true;
}

}  // namespace sbnn

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sbnn/rng.hpp"

namespace sbnn {

struct EnvironmentSpec {
  std::string name;
  int observation_dim = 0;
  int action_count = 0;
  int max_steps = 0;
  double solve_threshold = 0.0;  // per-episode reward counted as solved
};

struct StepOutcome {
  double reward = 0.0;
  bool terminated = false;
};

// Episodic control task. The observation lives in a buffer owned by the
// environment and is updated in place by reset()/step(), which keeps the
// interaction loop allocation-free. `allowed_actions` is the set of action
// ids step() accepts; remapped views restrict it to a subset.
class Environment {
 public:
  virtual ~Environment() = default;

  const EnvironmentSpec& spec() const { return spec_; }
  const std::vector<int>& allowed_actions() const { return allowed_; }
  const Eigen::VectorXd& observation() const { return obs_; }
  bool terminated() const { return terminated_; }
  int steps() const { return steps_; }

  // Starts a new episode; the initial state is drawn deterministically
  // from the seed. Returns the first observation.
  virtual const Eigen::VectorXd& reset(std::uint64_t seed) = 0;

  // Advances one step. Throws std::invalid_argument for an action not in
  // allowed_actions() and std::logic_error if the episode is over.
  virtual StepOutcome step(int action) = 0;

 protected:
  Environment(EnvironmentSpec spec, std::vector<int> allowed)
      : spec_(std::move(spec)),
        allowed_(std::move(allowed)),
        obs_(Eigen::VectorXd::Zero(spec_.observation_dim)) {}

  void check_step(int action) const;
  void begin_episode() { steps_ = 0; terminated_ = false; }
  // Counts the step and applies the step limit.
  bool count_step(bool physics_done) {
    ++steps_;
    terminated_ = physics_done || steps_ >= spec_.max_steps;
    return terminated_;
  }

  EnvironmentSpec spec_;
  std::vector<int> allowed_;
  Eigen::VectorXd obs_;
  int steps_ = 0;
  bool terminated_ = false;
};

// Pole balancing on a cart (classic control, Euler integration, 0.02 s
// steps). Observation (x, x_dot, theta, theta_dot); actions 0 = push left,
// 1 = push right; +1 reward per step including the terminal one; episode
// ends when |theta| > 12 deg, |x| > 2.4 or after 500 steps.
class CartPole final : public Environment {
 public:
  CartPole();
  const Eigen::VectorXd& reset(std::uint64_t seed) override;
  StepOutcome step(int action) override;

  // Starts an episode from an exact state (debugging, oracle checks).
  void set_state(double x, double x_dot, double theta, double theta_dot);

 private:
  double x_ = 0, x_dot_ = 0, theta_ = 0, theta_dot_ = 0;
  void publish();
};

// Underpowered car in a valley. Observation (position, velocity); actions
// 0 = push left, 1 = no push, 2 = push right; -1 reward per step; episode
// ends at position >= 0.5 or after 200 steps.
class MountainCar final : public Environment {
 public:
  MountainCar();
  const Eigen::VectorXd& reset(std::uint64_t seed) override;
  StepOutcome step(int action) override;

  // Starts an episode from an exact state (debugging, oracle checks).
  void set_state(double position, double velocity);

 private:
  double position_ = 0, velocity_ = 0;
  void publish();
};

// Maps a network's larger input/output spaces onto a target task:
//   input_map[k]  = network input fed by target observation slot k
//                   (all other network inputs read 0)
//   output_map[k] = network output that stands for target action k; the
//                   allowed action set of the view is exactly output_map
struct RemapSpec {
  std::vector<int> input_map;
  std::vector<int> output_map;
};

RemapSpec identity_remap(const EnvironmentSpec& spec);

// View of `target` through a network with `net_inputs`/`net_outputs`
// channels. step() takes a *network output index*, which must be one of
// output_map, and forwards the corresponding target action. Throws
// std::invalid_argument if the remap does not fit the target or network.
std::unique_ptr<Environment> wrap_remapped(std::unique_ptr<Environment> target,
                                           const RemapSpec& remap,
                                           int net_inputs, int net_outputs);

// "cartpole" or "mountaincar".
std::unique_ptr<Environment> make_environment(const std::string& name);

}  // namespace sbnn

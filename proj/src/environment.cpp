#include "sbnn/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace sbnn {

void Environment::check_step(int action) const {
  if (terminated_)
    throw std::logic_error("step() called on a terminated episode");
  if (std::find(allowed_.begin(), allowed_.end(), action) == allowed_.end())
    throw std::invalid_argument("action " + std::to_string(action) +
                                " not allowed in " + spec_.name);
}

namespace {

std::vector<int> iota_actions(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
  return v;
}

constexpr double kGravity = 9.8;
constexpr double kCartMass = 1.0;
constexpr double kPoleMass = 0.1;
constexpr double kTotalMass = kCartMass + kPoleMass;
constexpr double kPoleHalfLength = 0.5;
constexpr double kPoleMassLength = kPoleMass * kPoleHalfLength;
constexpr double kForce = 10.0;
constexpr double kTau = 0.02;
constexpr double kThetaLimit = 12.0 * 2.0 * std::numbers::pi / 360.0;
constexpr double kXLimit = 2.4;

}  // namespace

CartPole::CartPole()
    : Environment({"cartpole", 4, 2, 500, 475.0}, iota_actions(2)) {}

const Eigen::VectorXd& CartPole::reset(std::uint64_t seed) {
  Rng rng(seed);
  x_ = rng.uniform(-0.05, 0.05);
  x_dot_ = rng.uniform(-0.05, 0.05);
  theta_ = rng.uniform(-0.05, 0.05);
  theta_dot_ = rng.uniform(-0.05, 0.05);
  begin_episode();
  publish();
  return obs_;
}

StepOutcome CartPole::step(int action) {
  check_step(action);
  const double force = action == 1 ? kForce : -kForce;
  const double cos_theta = std::cos(theta_);
  const double sin_theta = std::sin(theta_);
  const double temp =
      (force + kPoleMassLength * theta_dot_ * theta_dot_ * sin_theta) / kTotalMass;
  const double theta_acc =
      (kGravity * sin_theta - cos_theta * temp) /
      (kPoleHalfLength * (4.0 / 3.0 - kPoleMass * cos_theta * cos_theta / kTotalMass));
  const double x_acc = temp - kPoleMassLength * theta_acc * cos_theta / kTotalMass;

  x_ += kTau * x_dot_;
  x_dot_ += kTau * x_acc;
  theta_ += kTau * theta_dot_;
  theta_dot_ += kTau * theta_acc;
  publish();

  const bool fell = x_ < -kXLimit || x_ > kXLimit || theta_ < -kThetaLimit ||
                    theta_ > kThetaLimit;
  return {1.0, count_step(fell)};
}

void CartPole::set_state(double x, double x_dot, double theta, double theta_dot) {
  x_ = x;
  x_dot_ = x_dot;
  theta_ = theta;
  theta_dot_ = theta_dot;
  begin_episode();
  publish();
}

void CartPole::publish() {
  obs_ << x_, x_dot_, theta_, theta_dot_;
}

namespace {

constexpr double kMinPosition = -1.2;
constexpr double kMaxPosition = 0.6;
constexpr double kMaxSpeed = 0.07;
constexpr double kGoalPosition = 0.5;
constexpr double kEngineForce = 0.001;
constexpr double kValleyGravity = 0.0025;

}  // namespace

MountainCar::MountainCar()
    : Environment({"mountaincar", 2, 3, 200, -110.0}, iota_actions(3)) {}

const Eigen::VectorXd& MountainCar::reset(std::uint64_t seed) {
  Rng rng(seed);
  position_ = rng.uniform(-0.6, -0.4);
  velocity_ = 0.0;
  begin_episode();
  publish();
  return obs_;
}

StepOutcome MountainCar::step(int action) {
  check_step(action);
  velocity_ += (action - 1) * kEngineForce - std::cos(3.0 * position_) * kValleyGravity;
  velocity_ = std::clamp(velocity_, -kMaxSpeed, kMaxSpeed);
  position_ += velocity_;
  position_ = std::clamp(position_, kMinPosition, kMaxPosition);
  if (position_ == kMinPosition && velocity_ < 0.0) velocity_ = 0.0;
  publish();
  return {-1.0, count_step(position_ >= kGoalPosition)};
}

void MountainCar::set_state(double position, double velocity) {
  position_ = position;
  velocity_ = velocity;
  begin_episode();
  publish();
}

void MountainCar::publish() {
  obs_ << position_, velocity_;
}

RemapSpec identity_remap(const EnvironmentSpec& spec) {
  RemapSpec remap;
  for (int i = 0; i < spec.observation_dim; ++i) remap.input_map.push_back(i);
  for (int a = 0; a < spec.action_count; ++a) remap.output_map.push_back(a);
  return remap;
}

namespace {

class RemappedEnvironment final : public Environment {
 public:
  RemappedEnvironment(std::unique_ptr<Environment> target, RemapSpec remap,
                      int net_inputs, int net_outputs)
      : Environment(view_spec(*target, net_inputs, net_outputs), remap.output_map),
        target_(std::move(target)),
        remap_(std::move(remap)) {}

  const Eigen::VectorXd& reset(std::uint64_t seed) override {
    target_->reset(seed);
    begin_episode();
    scatter();
    return obs_;
  }

  StepOutcome step(int action) override {
    check_step(action);
    const auto it = std::find(remap_.output_map.begin(), remap_.output_map.end(), action);
    const int target_action = static_cast<int>(it - remap_.output_map.begin());
    const StepOutcome out = target_->step(target_action);
    scatter();
    ++steps_;
    terminated_ = out.terminated;
    return out;
  }

 private:
  static EnvironmentSpec view_spec(const Environment& target, int net_inputs,
                                   int net_outputs) {
    EnvironmentSpec s = target.spec();
    s.name += "(remapped)";
    s.observation_dim = net_inputs;
    s.action_count = net_outputs;
    return s;
  }

  void scatter() {
    obs_.setZero();
    const Eigen::VectorXd& src = target_->observation();
    for (std::size_t k = 0; k < remap_.input_map.size(); ++k)
      obs_[remap_.input_map[k]] = src[static_cast<Eigen::Index>(k)];
  }

  std::unique_ptr<Environment> target_;
  RemapSpec remap_;
};

void check_unique(const std::vector<int>& v, const char* what) {
  std::set<int> s(v.begin(), v.end());
  if (s.size() != v.size())
    throw std::invalid_argument(std::string(what) + " contains duplicates");
}

}  // namespace

std::unique_ptr<Environment> wrap_remapped(std::unique_ptr<Environment> target,
                                           const RemapSpec& remap,
                                           int net_inputs, int net_outputs) {
  const EnvironmentSpec& t = target->spec();
  if (static_cast<int>(remap.input_map.size()) != t.observation_dim)
    throw std::invalid_argument("input_map must cover every target observation slot");
  if (static_cast<int>(remap.output_map.size()) != t.action_count)
    throw std::invalid_argument("output_map must cover every target action");
  for (int i : remap.input_map)
    if (i < 0 || i >= net_inputs)
      throw std::invalid_argument("input_map entry outside network inputs");
  for (int o : remap.output_map)
    if (o < 0 || o >= net_outputs)
      throw std::invalid_argument("output_map entry outside network outputs");
  check_unique(remap.input_map, "input_map");
  check_unique(remap.output_map, "output_map");
  return std::make_unique<RemappedEnvironment>(std::move(target), remap,
                                               net_inputs, net_outputs);
}

std::unique_ptr<Environment> make_environment(const std::string& name) {
  if (name == "cartpole") return std::make_unique<CartPole>();
  if (name == "mountaincar") return std::make_unique<MountainCar>();
  throw std::invalid_argument("unknown environment: " + name);
}

}  // namespace sbnn

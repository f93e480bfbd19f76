#pragma once

// Plain reference dynamics for the two control tasks, written separately
// from the environment classes so transcripts can be checked against an
// independent implementation. States are passed around by value; the
// caller owns step counting and the step limit.

#include <algorithm>
#include <cmath>
#include <numbers>

namespace env_oracle {

struct CartPoleState {
  double x, x_dot, theta, theta_dot;
};

struct OracleStep {
  double reward;
  bool physics_done;
};

inline OracleStep cartpole_step(CartPoleState& s, int action) {
  const double gravity = 9.8;
  const double total_mass = 1.0 + 0.1;
  const double pole_half = 0.5;
  const double polemass_length = 0.1 * 0.5;
  const double force_mag = 10.0;
  const double tau = 0.02;

  const double force = action == 1 ? force_mag : -force_mag;
  const double ct = std::cos(s.theta), st = std::sin(s.theta);
  const double temp =
      (force + polemass_length * s.theta_dot * s.theta_dot * st) / total_mass;
  const double theta_acc =
      (gravity * st - ct * temp) /
      (pole_half * (4.0 / 3.0 - 0.1 * ct * ct / total_mass));
  const double x_acc = temp - polemass_length * theta_acc * ct / total_mass;

  s.x += tau * s.x_dot;
  s.x_dot += tau * x_acc;
  s.theta += tau * s.theta_dot;
  s.theta_dot += tau * theta_acc;

  const double theta_limit = 12.0 * std::numbers::pi / 180.0;
  const bool done =
      std::abs(s.x) > 2.4 || std::abs(s.theta) > theta_limit;
  return {1.0, done};
}

struct MountainCarState {
  double position, velocity;
};

inline OracleStep mountaincar_step(MountainCarState& s, int action) {
  s.velocity += (action - 1) * 0.001 - 0.0025 * std::cos(3.0 * s.position);
  s.velocity = std::max(-0.07, std::min(0.07, s.velocity));
  s.position += s.velocity;
  s.position = std::max(-1.2, std::min(0.6, s.position));
  if (s.position <= -1.2 && s.velocity < 0.0) s.velocity = 0.0;
  return {-1.0, s.position >= 0.5};
}

}  // namespace env_oracle

#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "armpg/rng.hpp"

namespace armpg {

enum class EnvId { kCartpole, kMountainCar, kPendulum };

const char* to_string(EnvId id);
std::optional<EnvId> env_from_string(std::string_view name);

/// Physics constants for the three classic-control tasks. All tasks expose a
/// binary action set; see binarize() for the mapping to physical actions.
struct CartpoleConstants {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_length = 0.5;   // half the pole length
  double force_mag = 10.0;
  double dt = 0.02;
  double theta_threshold = 12.0 * 3.14159265358979323846 / 180.0;
  double x_threshold = 2.4;
};

struct MountainCarConstants {
  double power = 0.0015;        // velocity gain per unit force
  double gravity_coef = 0.0025; // slope term coefficient on cos(3p)
  double min_position = -1.2;
  double max_position = 0.6;
  double max_speed = 0.07;
  double goal_position = 0.45;
  double force_scale = 1.0;     // binary action maps to +-force_scale
  double step_cost_coef = 0.05; // reward -coef * force^2 per step
  double goal_reward = 100.0;
};

struct PendulumConstants {
  double gravity = 10.0;
  double mass = 1.0;
  double length = 1.0;
  double dt = 0.05;
  double max_torque = 2.0;
  double max_speed = 8.0;  // angular velocity clipped to [-8, 8]
};

struct EnvSpec {
  EnvId id = EnvId::kCartpole;
  std::size_t horizon = 200;  // episode truncates after this many steps
  CartpoleConstants cartpole;
  MountainCarConstants mountain_car;
  PendulumConstants pendulum;

  static EnvSpec make(EnvId id, std::size_t horizon);
  std::size_t state_dim() const;  // cartpole 4, mountaincar 2, pendulum 3
};

/// Observation vector plus the elapsed step counter.
/// cartpole: (x, x_dot, theta, theta_dot); mountaincar: (position, velocity);
/// pendulum: (cos theta, sin theta, theta_dot).
struct EnvState {
  std::vector<double> obs;
  std::size_t elapsed = 0;
};

struct StepResult {
  EnvState next;
  double reward = 0.0;
  bool terminal = false;   // genuine episode end (zero continuation value)
  bool truncated = false;  // horizon cap hit (bootstrap the critic)
};

/// Draws a fresh initial state. All randomness an environment ever consumes
/// happens here; step() is deterministic.
EnvState reset(const EnvSpec& spec, RngStream& rng);

/// Advances one step (semi-implicit Euler for cartpole and pendulum:
/// velocities update first). Throws if the episode already hit the horizon.
/// terminal and truncated are mutually exclusive; terminal wins if physics
/// ends the episode on the horizon step.
StepResult step(const EnvSpec& spec, const EnvState& state, int action);

/// Maps a binary action to its physical value: 0 -> -scale, 1 -> +scale
/// (cartpole: +-force_mag; mountaincar: +-force_scale; pendulum: +-max_torque).
double binarize(int action, const EnvSpec& spec);

}  // namespace armpg

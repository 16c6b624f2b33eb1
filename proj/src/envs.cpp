#include "armpg/envs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace armpg {

const char* to_string(EnvId id) {
  switch (id) {
    case EnvId::kCartpole: return "cartpole";
    case EnvId::kMountainCar: return "mountaincar";
    case EnvId::kPendulum: return "pendulum";
  }
  return "unknown";
}

std::optional<EnvId> env_from_string(std::string_view name) {
  if (name == "cartpole") return EnvId::kCartpole;
  if (name == "mountaincar") return EnvId::kMountainCar;
  if (name == "pendulum") return EnvId::kPendulum;
  return std::nullopt;
}

EnvSpec EnvSpec::make(EnvId id, std::size_t horizon) {
  if (horizon == 0) throw std::invalid_argument("EnvSpec: horizon must be >= 1");
  EnvSpec spec;
  spec.id = id;
  spec.horizon = horizon;
  return spec;
}

std::size_t EnvSpec::state_dim() const {
  switch (id) {
    case EnvId::kCartpole: return 4;
    case EnvId::kMountainCar: return 2;
    case EnvId::kPendulum: return 3;
  }
  return 0;
}

double binarize(int action, const EnvSpec& spec) {
  if (action != 0 && action != 1) throw std::invalid_argument("binarize: action must be 0 or 1");
  const double sign = action == 1 ? 1.0 : -1.0;
  switch (spec.id) {
    case EnvId::kCartpole: return sign * spec.cartpole.force_mag;
    case EnvId::kMountainCar: return sign * spec.mountain_car.force_scale;
    case EnvId::kPendulum: return sign * spec.pendulum.max_torque;
  }
  return 0.0;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

double angle_normalize(double theta) {
  // wraps to [-pi, pi]
  double a = std::fmod(theta + kPi, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a - kPi;
}

}  // namespace

EnvState reset(const EnvSpec& spec, RngStream& rng) {
  EnvState s;
  s.elapsed = 0;
  switch (spec.id) {
    case EnvId::kCartpole:
      s.obs.resize(4);
      for (auto& v : s.obs) v = rng.uniform(-0.05, 0.05);
      break;
    case EnvId::kMountainCar:
      s.obs = {rng.uniform(-0.6, -0.4), 0.0};
      break;
    case EnvId::kPendulum: {
      const double theta = rng.uniform(-kPi, kPi);
      const double theta_dot = rng.uniform(-1.0, 1.0);
      s.obs = {std::cos(theta), std::sin(theta), theta_dot};
      break;
    }
  }
  return s;
}

StepResult step(const EnvSpec& spec, const EnvState& state, int action) {
  if (state.elapsed >= spec.horizon) {
    throw std::logic_error("step: episode already hit the horizon; reset first");
  }
  if (state.obs.size() != spec.state_dim()) throw std::invalid_argument("step: bad state size");
  const double force = binarize(action, spec);

  StepResult res;
  res.next.elapsed = state.elapsed + 1;

  switch (spec.id) {
    case EnvId::kCartpole: {
      const auto& c = spec.cartpole;
      double x = state.obs[0], x_dot = state.obs[1];
      double theta = state.obs[2], theta_dot = state.obs[3];
      const double total_mass = c.cart_mass + c.pole_mass;
      const double pole_mass_length = c.pole_mass * c.half_length;
      const double cos_t = std::cos(theta);
      const double sin_t = std::sin(theta);
      const double temp = (force + pole_mass_length * theta_dot * theta_dot * sin_t) / total_mass;
      const double theta_acc = (c.gravity * sin_t - cos_t * temp) /
                               (c.half_length * (4.0 / 3.0 - c.pole_mass * cos_t * cos_t / total_mass));
      const double x_acc = temp - pole_mass_length * theta_acc * cos_t / total_mass;
      x_dot += c.dt * x_acc;
      x += c.dt * x_dot;
      theta_dot += c.dt * theta_acc;
      theta += c.dt * theta_dot;
      res.next.obs = {x, x_dot, theta, theta_dot};
      res.reward = 1.0;  // every step earns 1, including the terminating one
      res.terminal = std::fabs(x) > c.x_threshold || std::fabs(theta) > c.theta_threshold;
      break;
    }
    case EnvId::kMountainCar: {
      const auto& c = spec.mountain_car;
      double position = state.obs[0], velocity = state.obs[1];
      velocity += force * c.power - c.gravity_coef * std::cos(3.0 * position);
      velocity = std::clamp(velocity, -c.max_speed, c.max_speed);
      position += velocity;
      if (position < c.min_position) {
        position = c.min_position;
        velocity = 0.0;  // inelastic left wall
      }
      if (position > c.max_position) position = c.max_position;
      res.next.obs = {position, velocity};
      res.terminal = position >= c.goal_position;
      res.reward = -c.step_cost_coef * force * force + (res.terminal ? c.goal_reward : 0.0);
      break;
    }
    case EnvId::kPendulum: {
      const auto& c = spec.pendulum;
      const double theta = std::atan2(state.obs[1], state.obs[0]);
      double theta_dot = state.obs[2];
      const double torque = std::clamp(force, -c.max_torque, c.max_torque);
      const double tn = angle_normalize(theta);
      res.reward = -(tn * tn + 0.1 * theta_dot * theta_dot + 0.001 * torque * torque);
      theta_dot += (3.0 * c.gravity / (2.0 * c.length) * std::sin(theta) +
                    3.0 / (c.mass * c.length * c.length) * torque) *
                   c.dt;
      theta_dot = std::clamp(theta_dot, -c.max_speed, c.max_speed);
      const double new_theta = theta + theta_dot * c.dt;
      res.next.obs = {std::cos(new_theta), std::sin(new_theta), theta_dot};
      res.terminal = false;  // pendulum never terminates, only truncates
      break;
    }
  }

  res.truncated = !res.terminal && res.next.elapsed >= spec.horizon;
  return res;
}

}  // namespace armpg

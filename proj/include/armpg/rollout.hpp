#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "armpg/mlp.hpp"
#include "armpg/sampling.hpp"

namespace armpg {

/// Fixed-size block of on-policy transitions. All per-timestep arrays share
/// length B. Episode segments are contiguous; the last step of every segment
/// carries either the terminal or the truncated flag (the collector truncates
/// the final segment artificially when the batch ends mid-episode). Truncated
/// steps carry the successor state so the critic can bootstrap its value.
struct RolloutBatch {
  std::size_t state_dim = 0;
  std::vector<double> states;             // B x state_dim, row-major
  std::vector<CoupledDraw> draws;         // u_t, a_t, pseudo action, pi_t
  std::vector<double> rewards;            // r_t
  std::vector<std::uint8_t> terminal;     // genuine episode end at t
  std::vector<std::uint8_t> truncated;    // horizon/batch cutoff at t
  std::vector<double> bootstrap_states;   // B x state_dim; row t valid iff truncated[t]
  std::vector<double> values;             // critic V(s_t); see refresh_critic_values
  std::vector<double> bootstrap_values;   // critic V(successor); valid iff truncated[t]

  std::size_t size() const { return draws.size(); }
  std::span<const double> state(std::size_t t) const {
    return {states.data() + t * state_dim, state_dim};
  }
  std::span<const double> bootstrap_state(std::size_t t) const {
    return {bootstrap_states.data() + t * state_dim, state_dim};
  }

  void reserve(std::size_t n);

  /// Appends one transition. `bootstrap` may be empty unless `trunc` is set.
  void push_back(std::span<const double> state, const CoupledDraw& draw, double reward,
                 bool term, bool trunc, std::span<const double> bootstrap);

  /// Throws std::invalid_argument unless every array has length B, flags are
  /// mutually exclusive, and the final step closes its segment.
  void validate() const;
};

/// Fills batch.values (and batch.bootstrap_values on truncated rows) with
/// fresh evaluations of `critic`. Parallel over rows; result is independent
/// of scheduling.
void refresh_critic_values(RolloutBatch& batch, const Mlp& critic);

}  // namespace armpg

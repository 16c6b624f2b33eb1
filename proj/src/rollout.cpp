#include "armpg/rollout.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "armpg/parallel.hpp"

namespace armpg {

namespace {
constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();
}

void RolloutBatch::reserve(std::size_t n) {
  states.reserve(n * state_dim);
  draws.reserve(n);
  rewards.reserve(n);
  terminal.reserve(n);
  truncated.reserve(n);
  bootstrap_states.reserve(n * state_dim);
  values.reserve(n);
  bootstrap_values.reserve(n);
}

void RolloutBatch::push_back(std::span<const double> state, const CoupledDraw& draw, double reward,
                             bool term, bool trunc, std::span<const double> bootstrap) {
  if (state_dim == 0) state_dim = state.size();
  if (state.size() != state_dim) throw std::invalid_argument("RolloutBatch: state dim mismatch");
  if (term && trunc) throw std::invalid_argument("RolloutBatch: terminal and truncated both set");
  if (trunc && bootstrap.size() != state_dim) {
    throw std::invalid_argument("RolloutBatch: truncated step needs a bootstrap state");
  }
  states.insert(states.end(), state.begin(), state.end());
  draws.push_back(draw);
  rewards.push_back(reward);
  terminal.push_back(term ? 1 : 0);
  truncated.push_back(trunc ? 1 : 0);
  if (trunc) {
    bootstrap_states.insert(bootstrap_states.end(), bootstrap.begin(), bootstrap.end());
  } else {
    bootstrap_states.insert(bootstrap_states.end(), state_dim, 0.0);
  }
  values.push_back(kUnset);
  bootstrap_values.push_back(kUnset);
}

void RolloutBatch::validate() const {
  const std::size_t n = draws.size();
  if (n == 0) throw std::invalid_argument("RolloutBatch: empty batch");
  if (state_dim == 0 || states.size() != n * state_dim ||
      bootstrap_states.size() != n * state_dim || rewards.size() != n ||
      terminal.size() != n || truncated.size() != n || values.size() != n ||
      bootstrap_values.size() != n) {
    throw std::invalid_argument("RolloutBatch: array lengths disagree");
  }
  for (std::size_t t = 0; t < n; ++t) {
    if (terminal[t] && truncated[t]) {
      throw std::invalid_argument("RolloutBatch: step flags both terminal and truncated");
    }
  }
  if (!terminal[n - 1] && !truncated[n - 1]) {
    throw std::invalid_argument("RolloutBatch: final step does not close its segment");
  }
}

void refresh_critic_values(RolloutBatch& batch, const Mlp& critic) {
  batch.validate();
  if (critic.input_dim() != batch.state_dim) {
    throw std::invalid_argument("refresh_critic_values: critic input dim mismatch");
  }
  const std::size_t n = batch.size();
#ifdef _OPENMP
#pragma omp parallel
#endif
  {
    MlpCache cache;
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      const auto t = static_cast<std::size_t>(i);
      batch.values[t] = critic.forward(batch.state(t), cache);
      if (batch.truncated[t]) {
        batch.bootstrap_values[t] = critic.forward(batch.bootstrap_state(t), cache);
      }
    }
  }
}

}  // namespace armpg

#include "armpg/advantage.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "armpg/grad.hpp"

namespace armpg {

const char* to_string(AdvantageMethod method) {
  return method == AdvantageMethod::kA2c ? "a2c" : "gae";
}

std::vector<double> mc_returns(const RolloutBatch& batch, double gamma) {
  batch.validate();
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("mc_returns: gamma outside [0,1]");
  const std::size_t n = batch.size();
  std::vector<double> out(n);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    if (batch.terminal[t]) {
      running = batch.rewards[t];
    } else if (batch.truncated[t]) {
      const double boot = batch.bootstrap_values[t];
      if (!std::isfinite(boot)) {
        throw std::invalid_argument("mc_returns: truncated step lacks a bootstrap value");
      }
      running = batch.rewards[t] + gamma * boot;
    } else {
      running = batch.rewards[t] + gamma * running;
    }
    out[t] = running;
  }
  return out;
}

AdvantageVector a2c_advantage(RolloutBatch& batch, const Mlp& critic, double gamma) {
  refresh_critic_values(batch, critic);
  AdvantageVector adv;
  adv.method = AdvantageMethod::kA2c;
  adv.gamma = gamma;
  adv.lambda = 1.0;
  adv.values = mc_returns(batch, gamma);
  for (std::size_t t = 0; t < adv.values.size(); ++t) adv.values[t] -= batch.values[t];
  return adv;
}

AdvantageVector gae(RolloutBatch& batch, const Mlp& critic, double gamma, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("gae: lambda outside [0,1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gae: gamma outside [0,1]");
  refresh_critic_values(batch, critic);

  AdvantageVector adv;
  adv.method = AdvantageMethod::kGae;
  adv.gamma = gamma;
  adv.lambda = lambda;
  const std::size_t n = batch.size();
  adv.values.resize(n);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    double delta;
    if (batch.terminal[t]) {
      delta = batch.rewards[t] - batch.values[t];
      running = delta;
    } else if (batch.truncated[t]) {
      delta = batch.rewards[t] + gamma * batch.bootstrap_values[t] - batch.values[t];
      running = delta;
    } else {
      delta = batch.rewards[t] + gamma * batch.values[t + 1] - batch.values[t];
      running = delta + gamma * lambda * running;
    }
    adv.values[t] = running;
  }
  return adv;
}

void normalize_advantages(AdvantageVector& adv) {
  const std::size_t n = adv.values.size();
  if (n == 0) return;
  double mean = 0.0;
  for (double v : adv.values) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : adv.values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  const double scale = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& v : adv.values) v = (v - mean) * scale;
}

namespace {

double batch_mse(const Mlp& critic, const RolloutBatch& batch, const std::vector<double>& targets) {
  const auto values = batch_forward(critic, batch.states, batch.state_dim);
  double loss = 0.0;
  for (std::size_t t = 0; t < values.size(); ++t) {
    const double e = values[t] - targets[t];
    loss += e * e;
  }
  return loss / static_cast<double>(values.size());
}

}  // namespace

CriticFitResult fit_critic(RolloutBatch& batch, Mlp& critic, AdamState& opt, double gamma,
                           std::size_t epochs, std::size_t minibatch, RngStream& rng) {
  if (minibatch == 0) throw std::invalid_argument("fit_critic: minibatch must be >= 1");
  // Regression targets are frozen against the pre-fit critic (bootstrap
  // values included), so every epoch chases the same targets.
  refresh_critic_values(batch, critic);
  const std::vector<double> targets = mc_returns(batch, gamma);

  CriticFitResult result;
  result.loss_before = batch_mse(critic, batch, targets);
  if (!std::isfinite(result.loss_before)) {
    throw std::runtime_error("fit_critic: non-finite loss before fitting");
  }

  const std::size_t n = batch.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> mb_states;
  std::vector<double> mb_targets;
  GradientVector grad;
  grad.source = EstimatorKind::kCriticMse;
  grad.values.resize(critic.param_count());
  std::vector<double> weights;

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    // Fisher-Yates shuffle driven by the caller's stream
    for (std::size_t i = n - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.below(i + 1));
      std::swap(perm[i], perm[j]);
    }
    for (std::size_t start = 0; start < n; start += minibatch) {
      const std::size_t m = std::min(minibatch, n - start);
      mb_states.resize(m * batch.state_dim);
      mb_targets.resize(m);
      for (std::size_t k = 0; k < m; ++k) {
        const std::size_t t = perm[start + k];
        const auto s = batch.state(t);
        std::copy(s.begin(), s.end(), mb_states.begin() + k * batch.state_dim);
        mb_targets[k] = targets[t];
      }
      const auto preds = batch_forward(critic, mb_states, batch.state_dim);
      weights.resize(m);
      const double wscale = 2.0 / static_cast<double>(m);
      for (std::size_t k = 0; k < m; ++k) weights[k] = wscale * (preds[k] - mb_targets[k]);
      batch_weighted_param_grad(critic, mb_states, batch.state_dim, weights, grad.values);
      adam_step(critic.params(), opt, grad, /*maximize=*/false);
    }
  }

  // Leaves batch.values / bootstrap_values refreshed against the fitted critic.
  refresh_critic_values(batch, critic);
  double loss = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double e = batch.values[t] - targets[t];
    loss += e * e;
  }
  result.loss_after = loss / static_cast<double>(n);
  if (!std::isfinite(result.loss_after)) {
    throw std::runtime_error("fit_critic: non-finite loss after fitting");
  }
  return result;
}

}  // namespace armpg

#pragma once

#include <cstddef>
#include <vector>

#include "armpg/adam.hpp"
#include "armpg/mlp.hpp"
#include "armpg/rng.hpp"
#include "armpg/rollout.hpp"

namespace armpg {

enum class AdvantageMethod { kA2c, kGae };

const char* to_string(AdvantageMethod method);

struct AdvantageVector {
  std::vector<double> values;  // per timestep, aligned with the batch
  AdvantageMethod method = AdvantageMethod::kA2c;
  double gamma = 1.0;
  double lambda = 1.0;  // meaningful for kGae only
};

/// Discounted rewards-to-go within each episode segment:
///   returns[t] = r_t + gamma * returns[t+1],
/// seeded at the segment's last step with gamma * V(successor) on truncation
/// and nothing on genuine termination. Requires batch.bootstrap_values to be
/// populated on truncated rows (see refresh_critic_values).
std::vector<double> mc_returns(const RolloutBatch& batch, double gamma);

/// Advantages as rewards-to-go minus the critic's state values; never
/// normalised. Evaluates `critic` fresh on all states (and truncated-row
/// successors).
AdvantageVector a2c_advantage(RolloutBatch& batch, const Mlp& critic, double gamma);

/// Exponentially weighted temporal-difference advantages, computed per
/// segment by the backward recursion
///   A_t = delta_t + gamma * lambda * A_{t+1},
///   delta_t = r_t + gamma * V(s_{t+1}) - V(s_t),
/// where the successor value is 0 after genuine termination and the
/// bootstrap value after truncation. lambda=1 reproduces a2c_advantage
/// exactly; lambda=0 gives the one-step TD error.
AdvantageVector gae(RolloutBatch& batch, const Mlp& critic, double gamma, double lambda);

/// In-place standardisation to zero mean / unit variance. Off by default
/// everywhere; exists only behind a config flag (it rescales and shifts the
/// gradient away from the quantity the estimators target).
void normalize_advantages(AdvantageVector& adv);

struct CriticFitResult {
  double loss_before = 0.0;  // batch MSE against the regression targets, pre-fit
  double loss_after = 0.0;   // same, post-fit
};

/// Regresses the critic toward mc_returns targets with minibatch Adam steps
/// (epochs x ceil(B/minibatch) updates). Minibatch order comes from `rng`, so
/// a given stream state reproduces the fit bit-for-bit. Throws on non-finite
/// loss.
CriticFitResult fit_critic(RolloutBatch& batch, Mlp& critic, AdamState& opt, double gamma,
                           std::size_t epochs, std::size_t minibatch, RngStream& rng);

}  // namespace armpg

#pragma once

#include <cstddef>
#include <vector>

#include "armpg/advantage.hpp"
#include "armpg/grad.hpp"
#include "armpg/mlp.hpp"
#include "armpg/rng.hpp"
#include "armpg/rollout.hpp"

namespace armpg {

/// Advantage of the action NOT taken, from the taken action's probability and
/// advantage. Because the policy-weighted advantage at a state is zero,
///   p * adv + (1 - p) * pseudo_adv = 0, so pseudo_adv = -p/(1-p) * adv.
/// Rejects prob_on_action at 0 or 1 (the ratio blows up).
double pseudo_action_advantage(double prob_on_action, double adv_on_action);

/// Per-step logit-space coefficients D_t for the coupled-pair estimator.
/// When the pseudo action differs from the taken action,
///   D_t = (A(s_t, pseudo) - A(s_t, taken)) * (u_t - 1/2)
///       = -(p/(1-p) + 1) * A_t * (u_t - 1/2),
/// where p is the probability of the action actually taken (NOT of action 1)
/// and the pseudo advantage comes from the zero-mean identity above. When the
/// pair agrees, D_t is exactly 0.0 and the step is skipped entirely. The sign
/// is the ascent convention: positive D_t pushes the logit toward action 1.
std::vector<double> arm_coefficients(const RolloutBatch& batch, const AdvantageVector& adv);

/// Coupled-pair policy gradient: (1/B) * sum_t D_t * d logit(s_t) / d params.
GradientVector arm_pg(const Mlp& policy, const RolloutBatch& batch, const AdvantageVector& adv);

/// Advantage-weighted score function of the taken action:
/// (1/B) * sum_t A_t * (a_t - pi_t) * d logit / d params, where
/// (a - sigma(logit)) is d log pi(a) / d logit for the Bernoulli policy.
GradientVector a2c_pg(const Mlp& policy, const RolloutBatch& batch, const AdvantageVector& adv);

/// Rewards-to-go-weighted score function with no baseline:
/// (1/B) * sum_t Qhat_t * (a_t - pi_t) * d logit / d params, Qhat = mc_returns.
GradientVector reinforce_pg(const Mlp& policy, const RolloutBatch& batch, double gamma);

/// Advantages for both actions at each step, derived from the on-policy
/// advantage via the zero-mean identity.
struct BothActionAdvantages {
  std::vector<double> adv1;  // action 1
  std::vector<double> adv0;  // action 0
};

BothActionAdvantages both_action_advantages(const RolloutBatch& batch, const AdvantageVector& adv);

/// Closed-form per-state expectation of the score-function gradient:
/// (1/B) * sum_t (A1_t - A0_t) * pi_t * (1 - pi_t) * d logit / d params.
GradientVector expected_pg(const Mlp& policy, const RolloutBatch& batch,
                           const BothActionAdvantages& both);

/// Deliberately biased diagnostic: weights the on-policy advantage by the
/// score of a freshly resampled action a_r ~ pi(.|s_t) that never touched the
/// environment: (1/B) * sum_t A_t * (a_r_t - pi_t) * d logit / d params.
/// Step t consumes rng.substream(t), so the draw is reproducible and
/// independent of threading.
GradientVector resampled_a2c_pg(const Mlp& policy, const RolloutBatch& batch,
                                const AdvantageVector& adv, const RngStream& rng);

/// Logit-space coefficients for any estimator kind (the weights each *_pg
/// pairs with d logit / d params before the 1/B average). Exposed so callers
/// can share bookkeeping with the gradient path, e.g. the exact fraction of
/// zero coefficients in a batch.
std::vector<double> estimator_coefficients(EstimatorKind kind, const RolloutBatch& batch,
                                           const AdvantageVector& adv, double gamma,
                                           const RngStream& resample_rng);

/// (1/B) * sum_t coeff[t] * d logit(s_t) / d params for externally computed
/// coefficients. Every *_pg above is exactly this applied to its own
/// coefficient vector, so bookkeeping done on the coefficients (zero counts,
/// means) describes the emitted gradient faithfully.
GradientVector policy_gradient_from_coefficients(const Mlp& policy, const RolloutBatch& batch,
                                                 std::span<const double> coeff,
                                                 EstimatorKind source);

}  // namespace armpg

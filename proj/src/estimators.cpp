#include "armpg/estimators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace armpg {

double pseudo_action_advantage(double prob_on_action, double adv_on_action) {
  if (!(prob_on_action > 0.0 && prob_on_action < 1.0)) {
    throw std::invalid_argument("pseudo_action_advantage: prob_on_action must lie in (0,1)");
  }
  return -prob_on_action / (1.0 - prob_on_action) * adv_on_action;
}

namespace {

void check_alignment(const RolloutBatch& batch, const AdvantageVector& adv, const char* where) {
  batch.validate();
  if (adv.values.size() != batch.size()) {
    throw std::invalid_argument(std::string(where) + ": advantage/batch length mismatch");
  }
}

std::vector<double> score_coefficients(const RolloutBatch& batch,
                                       const std::vector<double>& weight_per_step) {
  std::vector<double> coeff(batch.size());
  for (std::size_t t = 0; t < batch.size(); ++t) {
    const auto& d = batch.draws[t];
    coeff[t] = weight_per_step[t] * (static_cast<double>(d.action) - d.prob_one);
  }
  return coeff;
}

std::vector<double> expected_coefficients(const RolloutBatch& batch,
                                          const BothActionAdvantages& both) {
  if (both.adv1.size() != batch.size() || both.adv0.size() != batch.size()) {
    throw std::invalid_argument("expected_pg: advantage/batch length mismatch");
  }
  std::vector<double> coeff(batch.size());
  for (std::size_t t = 0; t < batch.size(); ++t) {
    const double p1 = batch.draws[t].prob_one;
    coeff[t] = (both.adv1[t] - both.adv0[t]) * p1 * (1.0 - p1);
  }
  return coeff;
}

std::vector<double> resampled_coefficients(const RolloutBatch& batch, const AdvantageVector& adv,
                                           const RngStream& rng) {
  std::vector<double> coeff(batch.size());
  for (std::size_t t = 0; t < batch.size(); ++t) {
    const auto& d = batch.draws[t];
    RngStream step_rng = rng.substream(t);
    const int resampled = step_rng.uniform01() < d.prob_one ? 1 : 0;
    coeff[t] = adv.values[t] * (static_cast<double>(resampled) - d.prob_one);
  }
  return coeff;
}

}  // namespace

GradientVector policy_gradient_from_coefficients(const Mlp& policy, const RolloutBatch& batch,
                                                 std::span<const double> coeff,
                                                 EstimatorKind source) {
  if (coeff.size() != batch.size() || coeff.empty()) {
    throw std::invalid_argument("policy_gradient_from_coefficients: coefficient/batch mismatch");
  }
  GradientVector grad;
  grad.source = source;
  grad.values.resize(policy.param_count());
  std::vector<double> weights(coeff.size());
  const double inv_b = 1.0 / static_cast<double>(coeff.size());
  for (std::size_t t = 0; t < coeff.size(); ++t) weights[t] = coeff[t] * inv_b;
  batch_weighted_param_grad(policy, batch.states, batch.state_dim, weights, grad.values);
  return grad;
}

std::vector<double> arm_coefficients(const RolloutBatch& batch, const AdvantageVector& adv) {
  check_alignment(batch, adv, "arm_coefficients");
  std::vector<double> coeff(batch.size());
  for (std::size_t t = 0; t < batch.size(); ++t) {
    const auto& d = batch.draws[t];
    if (d.action == d.pseudo_action) {
      coeff[t] = 0.0;  // coupled pair agrees: the action-value difference vanishes identically
      continue;
    }
    const double p_taken = d.action == 1 ? d.prob_one : 1.0 - d.prob_one;
    if (!(p_taken > 0.0 && p_taken < 1.0)) {
      throw std::invalid_argument("arm_coefficients: saturated action probability on a differing step");
    }
    // D = (A(pseudo) - A(taken)) * (u - 1/2), with the pseudo advantage from
    // the zero-mean identity: A(pseudo) = -p/(1-p) * A(taken). Here p is the
    // probability of the action actually taken, not of action 1, and the
    // overall sign is the ascent convention: positive D pushes the logit
    // toward action 1.
    coeff[t] = -(p_taken / (1.0 - p_taken) + 1.0) * adv.values[t] * (d.u - 0.5);
  }
  return coeff;
}

GradientVector arm_pg(const Mlp& policy, const RolloutBatch& batch, const AdvantageVector& adv) {
  return policy_gradient_from_coefficients(policy, batch, arm_coefficients(batch, adv),
                                       EstimatorKind::kArm);
}

GradientVector a2c_pg(const Mlp& policy, const RolloutBatch& batch, const AdvantageVector& adv) {
  check_alignment(batch, adv, "a2c_pg");
  return policy_gradient_from_coefficients(policy, batch, score_coefficients(batch, adv.values),
                                       EstimatorKind::kA2c);
}

GradientVector reinforce_pg(const Mlp& policy, const RolloutBatch& batch, double gamma) {
  batch.validate();
  const auto q = mc_returns(batch, gamma);
  return policy_gradient_from_coefficients(policy, batch, score_coefficients(batch, q),
                                       EstimatorKind::kReinforce);
}

BothActionAdvantages both_action_advantages(const RolloutBatch& batch, const AdvantageVector& adv) {
  check_alignment(batch, adv, "both_action_advantages");
  BothActionAdvantages both;
  both.adv1.resize(batch.size());
  both.adv0.resize(batch.size());
  for (std::size_t t = 0; t < batch.size(); ++t) {
    const auto& d = batch.draws[t];
    const double p_taken = d.action == 1 ? d.prob_one : 1.0 - d.prob_one;
    const double other = pseudo_action_advantage(p_taken, adv.values[t]);
    both.adv1[t] = d.action == 1 ? adv.values[t] : other;
    both.adv0[t] = d.action == 1 ? other : adv.values[t];
  }
  return both;
}

GradientVector expected_pg(const Mlp& policy, const RolloutBatch& batch,
                           const BothActionAdvantages& both) {
  batch.validate();
  return policy_gradient_from_coefficients(policy, batch, expected_coefficients(batch, both),
                                       EstimatorKind::kExpected);
}

GradientVector resampled_a2c_pg(const Mlp& policy, const RolloutBatch& batch,
                                const AdvantageVector& adv, const RngStream& rng) {
  check_alignment(batch, adv, "resampled_a2c_pg");
  return policy_gradient_from_coefficients(policy, batch, resampled_coefficients(batch, adv, rng),
                                       EstimatorKind::kResampledA2c);
}

std::vector<double> estimator_coefficients(EstimatorKind kind, const RolloutBatch& batch,
                                           const AdvantageVector& adv, double gamma,
                                           const RngStream& resample_rng) {
  switch (kind) {
    case EstimatorKind::kArm:
      return arm_coefficients(batch, adv);
    case EstimatorKind::kA2c:
      check_alignment(batch, adv, "estimator_coefficients");
      return score_coefficients(batch, adv.values);
    case EstimatorKind::kReinforce:
      batch.validate();
      return score_coefficients(batch, mc_returns(batch, gamma));
    case EstimatorKind::kExpected:
      return expected_coefficients(batch, both_action_advantages(batch, adv));
    case EstimatorKind::kResampledA2c:
      check_alignment(batch, adv, "estimator_coefficients");
      return resampled_coefficients(batch, adv, resample_rng);
    case EstimatorKind::kCriticMse:
      break;
  }
  throw std::invalid_argument("estimator_coefficients: not a policy-gradient estimator");
}

}  // namespace armpg

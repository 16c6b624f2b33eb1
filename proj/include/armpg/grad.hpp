#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace armpg {

/// Which gradient estimator (or objective) produced a GradientVector.
enum class EstimatorKind {
  kArm,           // antithetically coupled action-pair estimator
  kA2c,           // advantage-weighted score function of the taken action
  kExpected,      // closed-form expectation over both actions
  kReinforce,     // Monte-Carlo-return-weighted score function, no baseline
  kResampledA2c,  // score function of an independently resampled action (biased)
  kCriticMse,     // mean-squared-error objective for the value network
};

const char* to_string(EstimatorKind kind);

/// Parses the estimator names accepted by configs and the command line:
/// arm | a2c | expected | reinforce | resampled_a2c. Returns nullopt on
/// anything else.
std::optional<EstimatorKind> estimator_from_string(std::string_view name);

/// Flat gradient with respect to a network's parameter vector, tagged with
/// the estimator that produced it. Layout matches Mlp::params().
struct GradientVector {
  std::vector<double> values;
  EstimatorKind source = EstimatorKind::kArm;
};

double l2_norm(const GradientVector& grad);

}  // namespace armpg

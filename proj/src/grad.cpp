#include "armpg/grad.hpp"

#include <cmath>

namespace armpg {

const char* to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kArm: return "arm";
    case EstimatorKind::kA2c: return "a2c";
    case EstimatorKind::kExpected: return "expected";
    case EstimatorKind::kReinforce: return "reinforce";
    case EstimatorKind::kResampledA2c: return "resampled_a2c";
    case EstimatorKind::kCriticMse: return "critic_mse";
  }
  return "unknown";
}

std::optional<EstimatorKind> estimator_from_string(std::string_view name) {
  if (name == "arm") return EstimatorKind::kArm;
  if (name == "a2c") return EstimatorKind::kA2c;
  if (name == "expected") return EstimatorKind::kExpected;
  if (name == "reinforce") return EstimatorKind::kReinforce;
  if (name == "resampled_a2c") return EstimatorKind::kResampledA2c;
  return std::nullopt;
}

double l2_norm(const GradientVector& grad) {
  double s = 0.0;
  for (double g : grad.values) s += g * g;
  return std::sqrt(s);
}

}  // namespace armpg

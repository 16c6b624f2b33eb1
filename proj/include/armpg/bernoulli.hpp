#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "armpg/grad.hpp"
#include "armpg/rng.hpp"

namespace armpg {

/// Black-box objective over a vector of binary variables. `eval` must be
/// deterministic and total on {0,1}^dim.
struct BinaryObjective {
  std::size_t dim = 0;
  std::function<double(std::span<const std::uint8_t>)> eval;
};

/// Independent Bernoulli distribution over {0,1}^V parameterised in logit
/// space: P(z_v = 1) = sigma(phi_v).
struct BernoulliParams {
  std::vector<double> phi;
  std::size_t dim() const { return phi.size(); }
};

/// One single-sample estimate of d/dphi E[f(z)] from a shared uniform vector
/// u, using the antithetic action pair per component:
///   z1_v = 1[u_v > sigma(-phi_v)],  z2_v = 1[u_v < sigma(phi_v)],
///   g_v  = (f(z1) - f(z2)) * (u_v - 1/2).
/// The estimate is exactly 0 in every component when z1 == z2.
std::vector<double> arm_grad_sample(const BernoulliParams& params, const BinaryObjective& f,
                                    std::span<const double> u);

/// One single-sample score-function estimate from a drawn configuration z:
///   g_v = (f(z) - baseline) * (z_v - sigma(phi_v)).
std::vector<double> reinforce_grad_sample(const BernoulliParams& params, const BinaryObjective& f,
                                          std::span<const std::uint8_t> z, double baseline);

/// Exact gradient of E[f(z)] by enumerating all 2^V configurations.
/// Rejects dim > 20 (enumeration would exceed ~10^6 evaluations).
std::vector<double> exact_grad_bruteforce(const BernoulliParams& params, const BinaryObjective& f);

/// Exact objective expectation E[f(z)] by enumeration, same dim limit.
double exact_value_bruteforce(const BernoulliParams& params, const BinaryObjective& f);

/// Per-component sample mean and unbiased sample variance of a gradient
/// estimator over n independent draws.
struct VarianceProbe {
  std::vector<double> mean;
  std::vector<double> variance;
  std::size_t samples = 0;
};

/// Monte-Carlo probe of a single-sample estimator (kArm or kReinforce, the
/// latter with baseline 0). Draw i uses rng.substream(i), and partial sums
/// combine in a fixed chunk order, so the result is bit-identical for a given
/// stream regardless of thread count.
VarianceProbe variance_probe(const BernoulliParams& params, const BinaryObjective& f,
                             EstimatorKind kind, std::size_t n, const RngStream& rng);

}  // namespace armpg

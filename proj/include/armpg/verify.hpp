#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace armpg {

/// Outcome of one verification check. `detail` is a one-line human summary of
/// the measured quantities and their limits.
struct SuiteResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// One estimator/component line of the Bernoulli oracle comparison; the
/// verify command dumps these as a CSV next to the pass/fail table.
struct BernoulliOracleRow {
  std::size_t instance = 0;
  std::size_t component = 0;
  std::string estimator;  // "arm" or "reinforce"
  double oracle = 0.0;
  double mean = 0.0;
  double se = 0.0;
  double variance = 0.0;
};

/// Monte-Carlo gradient means on random independent-Bernoulli objectives
/// (dimension up to 3) against brute-force enumeration: the coupled-pair and
/// the score-function estimator must each land within 3 standard errors in
/// every component. 50 instances, 10^5 samples each, budget 30 s. When
/// `rows` is non-null it receives the full per-component comparison.
SuiteResult check_bernoulli_oracle(std::vector<BernoulliOracleRow>* rows = nullptr);

void write_bernoulli_report_csv(std::span<const BernoulliOracleRow> rows,
                                const std::filesystem::path& path);

/// Estimator means on an exactly solvable 2-state, horizon-2 MDP with exact
/// advantages: coupled-pair, advantage-weighted score, and closed-form
/// expected gradient within 3 standard errors of the enumerated gradient
/// over 2*10^5 batches, while the resampled-action diagnostic shows |z| > 5
/// at the uniform policy (it is biased by construction). Budget 60 s.
SuiteResult check_tabular_unbiasedness();

/// Single-state bandit variance sweep over logits [-4, 4] (step 0.05):
/// the coupled-pair coefficient variance never exceeds 0.64 + 1e-9 of the
/// advantage-weighted score coefficient's worst case over the grid, and the
/// closed-form tail integrals agree with midpoint quadrature. Budget 5 s.
SuiteResult check_variance_bound();

/// Manual backpropagation against central finite differences (h = 1e-6) on
/// 20 random cases across both production network geometries, relative
/// error at most 1e-5 per parameter. States are redrawn if any hidden unit
/// sits within 1e-5 of its activation kink. Budget 5 s.
SuiteResult check_mlp_gradients();

/// Advantage-estimator identities on collected batches containing genuine
/// terminals, horizon truncations and a batch-boundary cut: lambda = 1
/// reproduces the Monte-Carlo advantage and lambda = 0 the one-step TD
/// error, both within 1e-12 per timestep.
SuiteResult check_advantage_identities();

/// Law of the antithetic action pair at logits {0, 1, 2, 4}, N = 10^5: the
/// disagreement rate matches 2*sigma(-|phi|) within 3 standard errors (at 0
/// it must be exactly 1), and both marginals match sigma(phi).
SuiteResult check_coupled_sampling_law();

/// All six checks, in the order above.
std::vector<SuiteResult> run_verification_suite();

/// Writes name,pass,seconds,detail rows (comma-sanitised) to `path`.
void write_suite_csv(std::span<const SuiteResult> results, const std::filesystem::path& path);

}  // namespace armpg

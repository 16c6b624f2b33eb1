#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "armpg/config.hpp"
#include "armpg/envs.hpp"
#include "armpg/mlp.hpp"
#include "armpg/rng.hpp"
#include "armpg/rollout.hpp"

namespace armpg {

/// Per-iteration log record; one CSV row each. Return statistics cover the
/// episodes that *ended* during the batch and are nan when none did.
struct IterationMetrics {
  std::size_t iter = 0;        // 1-based iteration index
  std::size_t env_steps = 0;   // cumulative environment steps so far
  double mean_return = 0.0;
  double min_return = 0.0;
  double max_return = 0.0;
  double action_diff_rate = 0.0;  // batch mean of |a_t - pseudo_t|
  double zero_grad_frac = 0.0;    // fraction of exactly-zero logit coefficients
  double grad_norm = 0.0;         // L2 norm of the applied policy gradient
  double critic_loss = 0.0;       // batch MSE after the critic fit
  double wallclock_s = 0.0;       // iteration wall time (not replay-stable)
};

/// CSV column order for IterationMetrics, also written as the header line.
extern const char* const kMetricsCsvHeader;

std::string metrics_csv_row(const IterationMetrics& m);

/// Streams fixed-size batches from one environment instance. The in-flight
/// episode persists across batches: a batch boundary cuts it with a
/// truncation row (bootstrap state attached) but does not reset the
/// environment. Episode returns (undiscounted reward sums) are credited to
/// the batch in which the episode genuinely ends.
class RolloutCollector {
 public:
  RolloutCollector(EnvSpec spec, RngStream env_rng);

  /// Collects exactly `batch_size` transitions under `policy`, drawing one
  /// coupled u per step from `policy_rng`. Appends finished-episode returns
  /// to `completed_returns` when non-null.
  RolloutBatch collect(const Mlp& policy, std::size_t batch_size, RngStream& policy_rng,
                       std::vector<double>* completed_returns);

  const EnvSpec& spec() const { return spec_; }

 private:
  EnvSpec spec_;
  RngStream env_rng_;
  EnvState current_;
  double episode_return_ = 0.0;
  MlpCache cache_;
};

struct TrainResult {
  std::vector<IterationMetrics> metrics;
  Mlp policy;
  Mlp critic;
  std::filesystem::path metrics_csv;
};

/// One full training run per the config: repeatedly collect a batch, fit the
/// critic, estimate advantages, apply the chosen policy-gradient estimator,
/// and take an ascent Adam step; logs one IterationMetrics row per iteration
/// to <out_dir>/metrics.csv (flushed every row) and writes policy.bin,
/// critic.bin and resolved_config.txt at the end.
///
/// Randomness is split into fixed streams of the config seed: 0 policy init,
/// 1 critic init, 2 environment, 3 coupled draws, 4 critic minibatch
/// shuffling, 5 resampling diagnostic. Identical configs therefore reproduce
/// the metrics CSV bit-for-bit in every column except wallclock_s.
///
/// A non-finite loss or gradient aborts the run: a "# aborted:" diagnostic
/// line is appended to the CSV and the exception rethrown.
TrainResult train(const TrainConfig& config, std::ostream* progress = nullptr);

enum class SweepAxis { kBatch, kLr, kSeeds };

const char* to_string(SweepAxis axis);

struct SweepConfig {
  TrainConfig base;
  SweepAxis axis = SweepAxis::kBatch;
  // batch axis: one run per (size, seed); iteration count frozen at the
  // BASE config's resolved count, so smaller batches consume fewer env steps.
  std::vector<std::size_t> batch_sizes = {256, 512, 1024, 2048};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  // lr axis: `lr_draws` configurations sampled jointly as (learning rate,
  // seed): lr = 10^x with x uniform in [log10_lr_min, log10_lr_max], seed
  // drawn from the same stream.
  std::size_t lr_draws = 30;
  double log10_lr_min = -6.0;
  double log10_lr_max = -3.0;
  // Trailing-iteration window for the per-run return statistic; 0 picks the
  // axis default (10 for batch/seeds, 50 for lr).
  std::size_t window = 0;
  std::size_t jobs = 1;  // concurrent runs
  std::string out_dir;

  std::size_t resolved_window() const {
    if (window != 0) return window;
    return axis == SweepAxis::kLr ? 50 : 10;
  }
};

struct SweepRunRow {
  std::size_t run_id = 0;
  std::size_t batch_size = 0;
  double lr = 0.0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  std::size_t env_steps = 0;
  double window_mean = 0.0;  // mean episode return over the trailing window
  double window_std = 0.0;   // sample std over the same window
  std::string status;        // "ok" or "failed: <reason>"
};

struct SweepResult {
  std::vector<SweepRunRow> runs;
  std::filesystem::path runs_csv;
  std::filesystem::path summary_csv;
};

/// Expands the axis into concrete configs, trains each under
/// <out_dir>/run_NNN/, and writes runs.csv (one row per run) plus summary.csv
/// (per-axis-value mean/std and min/25%/50%/75%/max quantiles of the window
/// means). Individual run failures are recorded in their row; the sweep
/// continues.
SweepResult sweep(const SweepConfig& config, std::ostream* progress = nullptr);

}  // namespace armpg

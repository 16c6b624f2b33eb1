#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "armpg/advantage.hpp"
#include "armpg/envs.hpp"
#include "armpg/grad.hpp"

namespace armpg {

/// Everything one training run needs. Defaults are the reference setup:
/// cartpole horizon 200, coupled-pair estimator with GAE(0.99, 0.95),
/// batch 2048, 10^6 total env steps, Adam 3e-4 for both networks.
struct TrainConfig {
  EnvId env = EnvId::kCartpole;
  std::size_t horizon = 200;
  EstimatorKind estimator = EstimatorKind::kArm;
  AdvantageMethod advantage = AdvantageMethod::kGae;
  std::size_t batch_size = 2048;
  std::size_t total_steps = 1000000;
  std::size_t iterations = 0;  // 0: derive floor(total_steps / batch_size)
  double policy_lr = 3e-4;
  double critic_lr = 3e-4;
  double gamma = 0.99;
  double lambda = 0.95;
  std::uint64_t seed = 0;
  double clip_norm = 0.0;  // 0 disables gradient clipping
  bool normalize_advantage = false;
  std::size_t critic_epochs = 5;
  std::size_t critic_minibatch = 64;
  bool fit_critic_first = true;  // fit the critic before computing advantages
  std::string out_dir;

  void validate() const;

  /// Iteration count actually run: the explicit override if nonzero, else
  /// floor(total_steps / batch_size) — the whole-batch count that keeps
  /// cumulative env steps within total_steps (488 at the defaults).
  std::size_t resolved_iterations() const;
};

/// Flat key=value config grammar: one pair per line, '#' starts a comment,
/// blank lines ignored, whitespace around keys/values trimmed.
std::map<std::string, std::string> parse_kv_text(std::string_view text);
std::map<std::string, std::string> parse_kv_file(const std::filesystem::path& path);

/// Applies parsed pairs onto a config. Unknown keys and unparsable values
/// throw std::invalid_argument (they are rejected, not ignored).
void apply_kv(TrainConfig& config, const std::map<std::string, std::string>& kv);

/// Serialises every field as key=value lines, in the fixed documented order;
/// feeding the result back through apply_kv reproduces the config exactly.
std::string serialize(const TrainConfig& config);

/// Writes serialize() to `path` (the replay record placed alongside outputs).
void write_resolved_config(const TrainConfig& config, const std::filesystem::path& path);

}  // namespace armpg

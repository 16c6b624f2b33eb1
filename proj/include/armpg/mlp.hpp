#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "armpg/rng.hpp"

namespace armpg {

class Mlp;

/// Reusable forward-pass workspace: flat activation / pre-activation buffers
/// plus backward scratch. One cache per thread; pass the same cache to the
/// backward call that consumes the forward pass.
struct MlpCache {
  std::vector<double> act;    // [input, hidden activations..., output]
  std::vector<double> pre;    // pre-activations per non-input layer
  std::vector<double> delta;  // backward scratch
  std::vector<double> delta_next;
};

/// Fully connected network with ReLU hidden activations and a single linear
/// output. Parameters live in one flat vector ordered layer by layer:
/// [W_0 row-major (out x in), b_0, W_1, b_1, ...]. All math is double
/// precision.
class Mlp {
 public:
  /// Zero-initialised network. `sizes` lists layer widths from input to
  /// output, e.g. {4, 64, 64, 1}; the output width must be 1.
  explicit Mlp(std::vector<std::size_t> sizes);

  /// He fan-in initialisation: each weight is uniform on
  /// (-sqrt(6/fan_in), +sqrt(6/fan_in)) (empirical variance 2/fan_in), biases
  /// zero. Weights are drawn in flat parameter order, so the same stream
  /// state reproduces the same network.
  static Mlp he_init(std::vector<std::size_t> sizes, RngStream& rng);

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t param_count() const { return params_.size(); }
  const std::vector<double>& params() const { return params_; }
  std::vector<double>& params() { return params_; }

  /// Scalar output for one input state; fills `cache` for a later backward.
  double forward(std::span<const double> state, MlpCache& cache) const;

  /// Convenience forward without retaining the cache.
  double forward(std::span<const double> state) const;

  /// Gradient of (upstream * output) with respect to every parameter,
  /// written (overwriting) into `grad`, which must have param_count entries.
  /// `cache` must come from the matching forward call.
  void backward(MlpCache& cache, double upstream, std::span<double> grad) const;

  /// Same, but accumulates (+=) into `grad`. Used by batch reductions.
  void backward_accumulate(MlpCache& cache, double upstream, std::span<double> grad) const;

  /// Binary checkpoint: magic, layer sizes, then the flat parameter vector as
  /// little-endian IEEE-754 doubles. load() rejects wrong magic or sizes.
  void save(const std::filesystem::path& path) const;
  static Mlp load(const std::filesystem::path& path);

 private:
  std::vector<std::size_t> sizes_;
  std::vector<double> params_;
  std::vector<std::size_t> w_off_, b_off_;    // per layer
  std::vector<std::size_t> act_off_, pre_off_;  // cache buffer offsets
  std::size_t act_total_ = 0, pre_total_ = 0, max_width_ = 0;

  void ensure_cache(MlpCache& cache) const;
};

/// Evaluates the network on a batch of states (flat row-major B x dim) in
/// parallel; outputs are written per index so the result never depends on
/// scheduling.
std::vector<double> batch_forward(const Mlp& net, std::span<const double> states, std::size_t dim);

/// Deterministic parallel reduction of sum_t weights[t] * d output(s_t) / d params
/// into `grad` (overwritten, param_count entries). Samples with weight
/// exactly 0.0 are skipped entirely. Partial sums combine in a fixed chunk
/// order, so results are bit-identical across thread counts.
void batch_weighted_param_grad(const Mlp& net, std::span<const double> states, std::size_t dim,
                               std::span<const double> weights, std::span<double> grad);

}  // namespace armpg

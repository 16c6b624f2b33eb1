#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "armpg/mlp.hpp"

namespace armpg::ref {

/// Serial single-threaded counterparts of the parallel batch kernels. They
/// share no scheduling machinery with the main implementations, so parity
/// tests comparing the two catch reduction-order and threading bugs; the
/// benchmark target measures what the parallel versions buy.

std::vector<double> batch_forward(const Mlp& net, std::span<const double> states,
                                  std::size_t dim);

/// sum_t weights[t] * d output(s_t) / d params, accumulated in plain index
/// order. Samples with weight exactly 0.0 are skipped, mirroring the
/// parallel kernel's contract.
void batch_weighted_param_grad(const Mlp& net, std::span<const double> states, std::size_t dim,
                               std::span<const double> weights, std::span<double> grad);

}  // namespace armpg::ref

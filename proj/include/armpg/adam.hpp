#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "armpg/grad.hpp"

namespace armpg {

/// Adam optimiser state for one parameter vector. Default moment decay and
/// epsilon follow the usual values (0.9, 0.999, 1e-8); bias correction is
/// always applied.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<double> m;  // first-moment estimate
  std::vector<double> v;  // second-moment estimate

  AdamState(std::size_t param_count, double learning_rate)
      : lr(learning_rate), m(param_count, 0.0), v(param_count, 0.0) {}
};

/// One Adam update of `params` in place. With maximize=false this descends
/// the gradient; with maximize=true it ascends (the gradient is negated
/// before the moment updates). Throws std::runtime_error with a diagnostic
/// if any gradient entry is non-finite.
void adam_step(std::vector<double>& params, AdamState& opt, const GradientVector& grad,
               bool maximize);

}  // namespace armpg

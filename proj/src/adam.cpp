#include "armpg/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace armpg {

void adam_step(std::vector<double>& params, AdamState& opt, const GradientVector& grad,
               bool maximize) {
  const std::size_t n = params.size();
  if (grad.values.size() != n || opt.m.size() != n || opt.v.size() != n) {
    throw std::invalid_argument("adam_step: size mismatch between params, state and gradient");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(grad.values[i])) {
      throw std::runtime_error(std::string("adam_step: non-finite gradient (source ") +
                               to_string(grad.source) + ", component " + std::to_string(i) + ")");
    }
  }

  opt.step += 1;
  const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  for (std::size_t i = 0; i < n; ++i) {
    const double g = maximize ? -grad.values[i] : grad.values[i];
    opt.m[i] = opt.beta1 * opt.m[i] + (1.0 - opt.beta1) * g;
    opt.v[i] = opt.beta2 * opt.v[i] + (1.0 - opt.beta2) * g * g;
    const double mhat = opt.m[i] / bc1;
    const double vhat = opt.v[i] / bc2;
    params[i] -= opt.lr * mhat / (std::sqrt(vhat) + opt.eps);
  }
}

}  // namespace armpg

#include "armpg/reference.hpp"

#include <algorithm>
#include <stdexcept>

namespace armpg::ref {

std::vector<double> batch_forward(const Mlp& net, std::span<const double> states,
                                  std::size_t dim) {
  if (dim != net.input_dim()) throw std::invalid_argument("ref::batch_forward: width mismatch");
  if (states.size() % dim != 0) {
    throw std::invalid_argument("ref::batch_forward: ragged state block");
  }
  const std::size_t n = states.size() / dim;
  std::vector<double> out(n);
  MlpCache cache;
  for (std::size_t t = 0; t < n; ++t) {
    out[t] = net.forward(states.subspan(t * dim, dim), cache);
  }
  return out;
}

void batch_weighted_param_grad(const Mlp& net, std::span<const double> states, std::size_t dim,
                               std::span<const double> weights, std::span<double> grad) {
  if (dim != net.input_dim()) {
    throw std::invalid_argument("ref::batch_weighted_param_grad: width mismatch");
  }
  if (states.size() != weights.size() * dim) {
    throw std::invalid_argument("ref::batch_weighted_param_grad: state/weight length mismatch");
  }
  if (grad.size() != net.param_count()) {
    throw std::invalid_argument("ref::batch_weighted_param_grad: bad grad length");
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  MlpCache cache;
  for (std::size_t t = 0; t < weights.size(); ++t) {
    if (weights[t] == 0.0) continue;
    net.forward(states.subspan(t * dim, dim), cache);
    net.backward_accumulate(cache, weights[t], grad);
  }
}

}  // namespace armpg::ref

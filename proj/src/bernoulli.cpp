#include "armpg/bernoulli.hpp"

#include <cmath>
#include <stdexcept>

#include "armpg/parallel.hpp"
#include "armpg/sampling.hpp"

namespace armpg {

namespace {

void check_dims(const BernoulliParams& params, const BinaryObjective& f, const char* where) {
  if (params.dim() == 0) throw std::invalid_argument(std::string(where) + ": empty parameters");
  if (params.dim() != f.dim) {
    throw std::invalid_argument(std::string(where) + ": objective dim " + std::to_string(f.dim) +
                                " != parameter dim " + std::to_string(params.dim()));
  }
  for (double p : params.phi) {
    if (!std::isfinite(p)) throw std::invalid_argument(std::string(where) + ": non-finite phi");
  }
}

}  // namespace

std::vector<double> arm_grad_sample(const BernoulliParams& params, const BinaryObjective& f,
                                    std::span<const double> u) {
  check_dims(params, f, "arm_grad_sample");
  const std::size_t v = params.dim();
  if (u.size() != v) throw std::invalid_argument("arm_grad_sample: u size mismatch");

  std::vector<std::uint8_t> z1(v);
  std::vector<std::uint8_t> z2(v);
  bool differ = false;
  for (std::size_t i = 0; i < v; ++i) {
    if (!(u[i] > 0.0 && u[i] < 1.0)) {
      throw std::invalid_argument("arm_grad_sample: u must lie strictly in (0,1)");
    }
    z1[i] = u[i] > sigmoid(-params.phi[i]) ? 1 : 0;
    z2[i] = u[i] < sigmoid(params.phi[i]) ? 1 : 0;
    differ = differ || z1[i] != z2[i];
  }

  std::vector<double> grad(v, 0.0);
  if (!differ) return grad;  // f(z1) - f(z2) is identically 0, skip both evals
  const double fdelta = f.eval(z1) - f.eval(z2);
  if (fdelta == 0.0) return grad;
  for (std::size_t i = 0; i < v; ++i) grad[i] = fdelta * (u[i] - 0.5);
  return grad;
}

std::vector<double> reinforce_grad_sample(const BernoulliParams& params, const BinaryObjective& f,
                                          std::span<const std::uint8_t> z, double baseline) {
  check_dims(params, f, "reinforce_grad_sample");
  const std::size_t v = params.dim();
  if (z.size() != v) throw std::invalid_argument("reinforce_grad_sample: z size mismatch");
  for (std::uint8_t b : z) {
    if (b > 1) throw std::invalid_argument("reinforce_grad_sample: z entries must be 0 or 1");
  }

  const double w = f.eval(z) - baseline;
  std::vector<double> grad(v);
  for (std::size_t i = 0; i < v; ++i) grad[i] = w * (static_cast<double>(z[i]) - sigmoid(params.phi[i]));
  return grad;
}

namespace {

constexpr std::size_t kMaxEnumerationDim = 20;

template <class PerConfig>
void enumerate_configs(const BernoulliParams& params, const BinaryObjective& f, PerConfig&& fn) {
  const std::size_t v = params.dim();
  if (v > kMaxEnumerationDim) {
    throw std::invalid_argument("brute-force enumeration limited to dim <= " +
                                std::to_string(kMaxEnumerationDim));
  }
  std::vector<double> p1(v);
  for (std::size_t i = 0; i < v; ++i) p1[i] = sigmoid(params.phi[i]);

  std::vector<std::uint8_t> z(v);
  const std::uint64_t count = std::uint64_t{1} << v;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    double prob = 1.0;
    for (std::size_t i = 0; i < v; ++i) {
      z[i] = (mask >> i) & 1u;
      prob *= z[i] ? p1[i] : 1.0 - p1[i];
    }
    fn(z, prob, p1);
  }
}

}  // namespace

std::vector<double> exact_grad_bruteforce(const BernoulliParams& params, const BinaryObjective& f) {
  check_dims(params, f, "exact_grad_bruteforce");
  std::vector<double> grad(params.dim(), 0.0);
  enumerate_configs(params, f,
                    [&](const std::vector<std::uint8_t>& z, double prob, const std::vector<double>& p1) {
                      const double fv = f.eval(z);
                      for (std::size_t i = 0; i < z.size(); ++i) {
                        grad[i] += fv * prob * (static_cast<double>(z[i]) - p1[i]);
                      }
                    });
  return grad;
}

double exact_value_bruteforce(const BernoulliParams& params, const BinaryObjective& f) {
  check_dims(params, f, "exact_value_bruteforce");
  double value = 0.0;
  enumerate_configs(params, f,
                    [&](const std::vector<std::uint8_t>& z, double prob, const std::vector<double>&) {
                      value += f.eval(z) * prob;
                    });
  return value;
}

VarianceProbe variance_probe(const BernoulliParams& params, const BinaryObjective& f,
                             EstimatorKind kind, std::size_t n, const RngStream& rng) {
  check_dims(params, f, "variance_probe");
  if (kind != EstimatorKind::kArm && kind != EstimatorKind::kReinforce) {
    throw std::invalid_argument("variance_probe: estimator must be arm or reinforce");
  }
  if (n < 2) throw std::invalid_argument("variance_probe: need at least 2 samples");

  const std::size_t v = params.dim();
  const std::size_t chunks = std::min<std::size_t>(par::kReductionChunks, n);
  std::vector<std::vector<double>> sum(chunks, std::vector<double>(v, 0.0));
  std::vector<std::vector<double>> sumsq(chunks, std::vector<double>(v, 0.0));

  par::for_chunks(n, chunks, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    std::vector<double> u(v);
    std::vector<std::uint8_t> z(v);
    for (std::size_t i = begin; i < end; ++i) {
      RngStream draw = rng.substream(i);
      for (std::size_t j = 0; j < v; ++j) u[j] = draw.uniform01();
      std::vector<double> g;
      if (kind == EstimatorKind::kArm) {
        g = arm_grad_sample(params, f, u);
      } else {
        for (std::size_t j = 0; j < v; ++j) z[j] = u[j] < sigmoid(params.phi[j]) ? 1 : 0;
        g = reinforce_grad_sample(params, f, z, 0.0);
      }
      for (std::size_t j = 0; j < v; ++j) {
        sum[chunk][j] += g[j];
        sumsq[chunk][j] += g[j] * g[j];
      }
    }
  });

  VarianceProbe out;
  out.samples = n;
  out.mean.assign(v, 0.0);
  out.variance.assign(v, 0.0);
  for (std::size_t c = 0; c < chunks; ++c) {
    for (std::size_t j = 0; j < v; ++j) {
      out.mean[j] += sum[c][j];
      out.variance[j] += sumsq[c][j];
    }
  }
  const auto dn = static_cast<double>(n);
  for (std::size_t j = 0; j < v; ++j) {
    out.mean[j] /= dn;
    out.variance[j] = (out.variance[j] - dn * out.mean[j] * out.mean[j]) / (dn - 1.0);
    if (out.variance[j] < 0.0) out.variance[j] = 0.0;  // guard tiny negative rounding
  }
  return out;
}

}  // namespace armpg

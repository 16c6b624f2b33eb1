#include "armpg/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "armpg/parallel.hpp"

namespace armpg {

namespace {

constexpr char kMagic[8] = {'A', 'R', 'M', 'P', 'G', 'N', '0', '1'};

void put_u32_le(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32_le(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

void put_f64_le(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64_le(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

}  // namespace

Mlp::Mlp(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output sizes");
  if (sizes_.back() != 1) throw std::invalid_argument("Mlp: output width must be 1");
  for (std::size_t s : sizes_) {
    if (s == 0) throw std::invalid_argument("Mlp: zero-width layer");
  }

  const std::size_t layers = sizes_.size() - 1;
  w_off_.resize(layers);
  b_off_.resize(layers);
  act_off_.resize(sizes_.size());
  pre_off_.resize(layers);

  std::size_t p = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    w_off_[l] = p;
    p += sizes_[l + 1] * sizes_[l];
    b_off_[l] = p;
    p += sizes_[l + 1];
  }
  params_.assign(p, 0.0);

  act_off_[0] = 0;
  act_total_ = sizes_[0];
  pre_total_ = 0;
  max_width_ = sizes_[0];
  for (std::size_t l = 0; l < layers; ++l) {
    pre_off_[l] = pre_total_;
    pre_total_ += sizes_[l + 1];
    act_off_[l + 1] = act_total_;
    act_total_ += sizes_[l + 1];
    max_width_ = std::max(max_width_, sizes_[l + 1]);
  }
}

Mlp Mlp::he_init(std::vector<std::size_t> sizes, RngStream& rng) {
  Mlp net(std::move(sizes));
  const std::size_t layers = net.sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t fan_in = net.sizes_[l];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    double* w = net.params_.data() + net.w_off_[l];
    const std::size_t nw = net.sizes_[l + 1] * fan_in;
    for (std::size_t i = 0; i < nw; ++i) w[i] = bound * (2.0 * rng.uniform01() - 1.0);
    // biases stay zero
  }
  return net;
}

void Mlp::ensure_cache(MlpCache& cache) const {
  cache.act.resize(act_total_);
  cache.pre.resize(pre_total_);
  cache.delta.resize(max_width_);
  cache.delta_next.resize(max_width_);
}

double Mlp::forward(std::span<const double> state, MlpCache& cache) const {
  if (state.size() != sizes_.front()) {
    throw std::invalid_argument("Mlp::forward: state dim " + std::to_string(state.size()) +
                                " != input dim " + std::to_string(sizes_.front()));
  }
  for (double x : state) {
    if (!std::isfinite(x)) throw std::invalid_argument("Mlp::forward: non-finite input");
  }
  ensure_cache(cache);
  std::copy(state.begin(), state.end(), cache.act.begin());

  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = sizes_[l];
    const std::size_t out = sizes_[l + 1];
    const double* w = params_.data() + w_off_[l];
    const double* b = params_.data() + b_off_[l];
    const double* a = cache.act.data() + act_off_[l];
    double* z = cache.pre.data() + pre_off_[l];
    double* an = cache.act.data() + act_off_[l + 1];
    const bool last = l + 1 == layers;
    for (std::size_t o = 0; o < out; ++o) {
      const double* row = w + o * in;
      double s = b[o];
      for (std::size_t i = 0; i < in; ++i) s += row[i] * a[i];
      z[o] = s;
      an[o] = last ? s : (s > 0.0 ? s : 0.0);
    }
  }
  return cache.act[act_off_[layers]];
}

double Mlp::forward(std::span<const double> state) const {
  MlpCache cache;
  return forward(state, cache);
}

void Mlp::backward(MlpCache& cache, double upstream, std::span<double> grad) const {
  std::fill(grad.begin(), grad.end(), 0.0);
  backward_accumulate(cache, upstream, grad);
}

void Mlp::backward_accumulate(MlpCache& cache, double upstream, std::span<double> grad) const {
  if (grad.size() != params_.size()) {
    throw std::invalid_argument("Mlp::backward: gradient buffer size mismatch");
  }
  if (upstream == 0.0) return;
  const std::size_t layers = sizes_.size() - 1;
  cache.delta[0] = upstream;

  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = sizes_[l];
    const std::size_t out = sizes_[l + 1];
    const double* w = params_.data() + w_off_[l];
    const double* a = cache.act.data() + act_off_[l];
    double* gw = grad.data() + w_off_[l];
    double* gb = grad.data() + b_off_[l];
    const double* d = cache.delta.data();

    for (std::size_t o = 0; o < out; ++o) {
      const double dv = d[o];
      if (dv == 0.0) continue;
      gb[o] += dv;
      double* grow = gw + o * in;
      for (std::size_t i = 0; i < in; ++i) grow[i] += dv * a[i];
    }

    if (l == 0) break;
    // delta for the previous layer: W^T d, masked by that layer's ReLU
    double* dn = cache.delta_next.data();
    const double* zprev = cache.pre.data() + pre_off_[l - 1];
    for (std::size_t i = 0; i < in; ++i) dn[i] = 0.0;
    for (std::size_t o = 0; o < out; ++o) {
      const double dv = d[o];
      if (dv == 0.0) continue;
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) dn[i] += dv * row[i];
    }
    for (std::size_t i = 0; i < in; ++i) dn[i] = zprev[i] > 0.0 ? dn[i] : 0.0;
    std::swap(cache.delta, cache.delta_next);
  }
}

void Mlp::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("Mlp::save: cannot open " + path.string());
  os.write(kMagic, sizeof(kMagic));
  put_u32_le(os, static_cast<std::uint32_t>(sizes_.size()));
  for (std::size_t s : sizes_) put_u32_le(os, static_cast<std::uint32_t>(s));
  for (double p : params_) put_f64_le(os, p);
  if (!os) throw std::runtime_error("Mlp::save: write failed for " + path.string());
}

Mlp Mlp::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("Mlp::load: cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("Mlp::load: bad magic in " + path.string());
  }
  const std::uint32_t nsizes = get_u32_le(is);
  if (!is || nsizes < 2 || nsizes > 64) throw std::runtime_error("Mlp::load: bad header");
  std::vector<std::size_t> sizes(nsizes);
  for (auto& s : sizes) s = get_u32_le(is);
  Mlp net(std::move(sizes));
  for (auto& p : net.params_) p = get_f64_le(is);
  if (!is) throw std::runtime_error("Mlp::load: truncated file " + path.string());
  return net;
}

std::vector<double> batch_forward(const Mlp& net, std::span<const double> states, std::size_t dim) {
  if (dim != net.input_dim()) throw std::invalid_argument("batch_forward: dim mismatch");
  if (states.size() % dim != 0) throw std::invalid_argument("batch_forward: ragged state buffer");
  const std::size_t n = states.size() / dim;
  std::vector<double> out(n);
#ifdef _OPENMP
#pragma omp parallel
#endif
  {
    MlpCache cache;
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      out[static_cast<std::size_t>(i)] =
          net.forward(states.subspan(static_cast<std::size_t>(i) * dim, dim), cache);
    }
  }
  return out;
}

void batch_weighted_param_grad(const Mlp& net, std::span<const double> states, std::size_t dim,
                               std::span<const double> weights, std::span<double> grad) {
  if (dim != net.input_dim()) throw std::invalid_argument("batch_weighted_param_grad: dim mismatch");
  if (states.size() % dim != 0) throw std::invalid_argument("batch_weighted_param_grad: ragged state buffer");
  const std::size_t n = states.size() / dim;
  if (weights.size() != n) throw std::invalid_argument("batch_weighted_param_grad: weight count mismatch");
  if (grad.size() != net.param_count()) {
    throw std::invalid_argument("batch_weighted_param_grad: gradient buffer size mismatch");
  }

  const std::size_t chunks = std::min<std::size_t>(par::kReductionChunks, std::max<std::size_t>(n, 1));
  std::vector<std::vector<double>> partial(chunks);

  par::for_chunks(n, chunks, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    auto& acc = partial[chunk];
    acc.assign(net.param_count(), 0.0);
    MlpCache cache;
    for (std::size_t t = begin; t < end; ++t) {
      const double w = weights[t];
      if (w == 0.0) continue;
      net.forward(states.subspan(t * dim, dim), cache);
      net.backward_accumulate(cache, w, acc);
    }
  });

  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t c = 0; c < chunks; ++c) {
    if (partial[c].empty()) continue;
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += partial[c][j];
  }
}

}  // namespace armpg

#include <benchmark/benchmark.h>

#include <cstddef>
#include <vector>

#include "armpg/mlp.hpp"
#include "armpg/reference.hpp"
#include "armpg/rng.hpp"

using namespace armpg;

namespace {

struct Workload {
  Mlp net;
  std::vector<double> states;
  std::vector<double> weights;
  std::size_t dim;
};

Workload make_workload(std::size_t batch) {
  RngStream rng(91, 0);
  Workload w{Mlp::he_init({4, 64, 64, 1}, rng), {}, {}, 4};
  w.states.resize(batch * w.dim);
  w.weights.resize(batch);
  RngStream s(91, 1);
  for (double& v : w.states) v = s.uniform(-2.0, 2.0);
  for (double& v : w.weights) v = s.uniform(-1.0, 1.0);
  return w;
}

void bm_batch_forward(benchmark::State& state) {
  const Workload w = make_workload(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(batch_forward(w.net, w.states, w.dim));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_batch_forward_serial(benchmark::State& state) {
  const Workload w = make_workload(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ref::batch_forward(w.net, w.states, w.dim));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_weighted_grad(benchmark::State& state) {
  const Workload w = make_workload(static_cast<std::size_t>(state.range(0)));
  std::vector<double> grad(w.net.param_count());
  for (auto _ : state) {
    batch_weighted_param_grad(w.net, w.states, w.dim, w.weights, grad);
    benchmark::DoNotOptimize(grad.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_weighted_grad_serial(benchmark::State& state) {
  const Workload w = make_workload(static_cast<std::size_t>(state.range(0)));
  std::vector<double> grad(w.net.param_count());
  for (auto _ : state) {
    ref::batch_weighted_param_grad(w.net, w.states, w.dim, w.weights, grad);
    benchmark::DoNotOptimize(grad.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(bm_batch_forward)->Arg(256)->Arg(2048)->Arg(16384);
BENCHMARK(bm_batch_forward_serial)->Arg(256)->Arg(2048)->Arg(16384);
BENCHMARK(bm_weighted_grad)->Arg(256)->Arg(2048)->Arg(16384);
BENCHMARK(bm_weighted_grad_serial)->Arg(256)->Arg(2048)->Arg(16384);

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "iir/harness.hpp"
#include "iir/kernel.hpp"
#include "iir/linear.hpp"
#include "iir/synthesis.hpp"

namespace {

iir::DataSet trig_sample(std::int64_t n, int d) {
  return iir::sample_trig(iir::TrigProblem::with_random_weights(d, 1), n, 2);
}

void BM_EpochUpdate(benchmark::State& state) {
  const auto data = trig_sample(state.range(0), static_cast<int>(state.range(1)));
  iir::IterState s{iir::Vector::Zero(data.d()), 0, iir::default_step_size(data)};
  for (auto _ : state) {
    s = iir::epoch_update(s, data);
    benchmark::DoNotOptimize(s.w.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EpochUpdate)->Args({800, 5})->Args({8000, 5})->Args({8000, 50});

void BM_BatchEpoch(benchmark::State& state) {
  const auto data = trig_sample(state.range(0), 5);
  iir::IterState s{iir::Vector::Zero(data.d()), 0, iir::default_step_size(data)};
  for (auto _ : state) {
    s = iir::batch_gd_epoch(s, data);
    benchmark::DoNotOptimize(s.w.data());
  }
}
BENCHMARK(BM_BatchEpoch)->Arg(800)->Arg(8000);

void BM_BuildEpochMap(benchmark::State& state) {
  const auto data = trig_sample(state.range(0), static_cast<int>(state.range(1)));
  const double gamma = iir::default_step_size(data);
  for (auto _ : state) benchmark::DoNotOptimize(iir::build_epoch_map(data, gamma));
}
BENCHMARK(BM_BuildEpochMap)->Args({50, 10})->Args({500, 10})->Args({500, 50});

void BM_GramMatrix(benchmark::State& state) {
  const auto data = trig_sample(state.range(0), 5);
  const auto kernel = iir::KernelSpec::gaussian(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(iir::gram_matrix(kernel, data.inputs()));
}
BENCHMARK(BM_GramMatrix)->Arg(200)->Arg(1000);

void BM_KiirEpoch(benchmark::State& state) {
  const auto data = trig_sample(state.range(0), 5);
  auto gram = std::make_shared<const iir::Matrix>(
      iir::gram_matrix(iir::KernelSpec::gaussian(1.0), data.inputs()));
  auto dual = iir::DualState::zero(gram, iir::DualState::default_step_size(*gram));
  for (auto _ : state) {
    dual = iir::kiir_epoch(dual, data.outputs());
    benchmark::DoNotOptimize(dual.alpha.data());
  }
}
BENCHMARK(BM_KiirEpoch)->Arg(200)->Arg(1000);

void BM_KrrFit(benchmark::State& state) {
  const auto data = trig_sample(state.range(0), 5);
  const auto gram = iir::gram_matrix(iir::KernelSpec::gaussian(1.0), data.inputs());
  for (auto _ : state) benchmark::DoNotOptimize(iir::krr_fit(gram, data.outputs(), 1e-3));
}
BENCHMARK(BM_KrrFit)->Arg(200)->Arg(1000);

void BM_EstimateRate(benchmark::State& state) {
  iir::RateConfig config;
  config.spectrum = iir::Preset::parse("source:r=1.5,d=20,ratio=0.7,noise=0.5").spectrum();
  config.grid = {64, 256, 1024, 4096};
  config.replicates = 5;
  for (auto _ : state) benchmark::DoNotOptimize(iir::estimate_rate(config).slope);
}
BENCHMARK(BM_EstimateRate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

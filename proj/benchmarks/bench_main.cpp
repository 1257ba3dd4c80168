#include <random>

#include <benchmark/benchmark.h>

#include "igsmc/core.hpp"
#include "igsmc/geodesic.hpp"
#include "igsmc/kernels.hpp"
#include "igsmc/metric.hpp"
#include "igsmc/smc.hpp"
#include "igsmc_tools/experiment.hpp"

using namespace igsmc;

namespace {

std::vector<double> random_log_weights(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 3.0);
  std::vector<double> lw(n);
  for (auto& v : lw) v = z(rng);
  return lw;
}

void BM_NormalizeAndEss(benchmark::State& state) {
  const auto lw = random_log_weights(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    const auto w = normalize_weights(lw).weights;
    benchmark::DoNotOptimize(ess(w));
  }
}
BENCHMARK(BM_NormalizeAndEss)->Arg(1000)->Arg(100000);

void BM_Resample(benchmark::State& state) {
  const auto w = normalize_weights(random_log_weights(static_cast<std::size_t>(state.range(0)))).weights;
  Rng rng = make_stream(1, 0, kResampleStream);
  const auto scheme = state.range(1) ? ResampleScheme::kSystematic : ResampleScheme::kMultinomial;
  for (auto _ : state) benchmark::DoNotOptimize(resample_indices(w, rng, scheme));
}
BENCHMARK(BM_Resample)->Args({1000, 0})->Args({1000, 1})->Args({100000, 0});

void BM_Sensitivities(benchmark::State& state) {
  const auto sys = fitzhugh_nagumo_system();
  const auto times = equally_spaced_times(0.0, 10.0, 25);
  const Vector x0{{-1.0, 1.0}}, xi{{0.2, 0.2, 3.0}};
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(integrate_with_sensitivities(*sys, x0, xi, times, order));
}
BENCHMARK(BM_Sensitivities)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

void BM_OdeModelEvaluate(benchmark::State& state) {
  const auto spec = tools::default_spec("lv-infer");
  const auto model = tools::make_ode_model("lotka-volterra", spec.model);
  const Vector xi{{8.0, 0.5, 0.2, 0.01}};
  const auto level = static_cast<EvalLevel>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(model->evaluate(xi, level));
}
BENCHMARK(BM_OdeModelEvaluate)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

void BM_Proposal(benchmark::State& state) {
  const auto spec = tools::default_spec("fn-infer");
  const auto model = tools::make_ode_model("fitzhugh-nagumo", spec.model);
  const Vector xi{{0.2, 0.2, 3.0}};
  const auto type = static_cast<KernelType>(state.range(0));
  for (auto _ : state) {
    if (type == KernelType::kMmalaEuler)
      benchmark::DoNotOptimize(mmala_euler_proposal(*model, xi, 0.5, 0.6));
    else if (type == KernelType::kMmalaSimplified)
      benchmark::DoNotOptimize(mmala_simplified_proposal(*model, xi, 0.5, 0.6));
    else
      benchmark::DoNotOptimize(mmala_ozaki_proposal(*model, xi, 0.5, 0.6));
  }
}
BENCHMARK(BM_Proposal)
    ->Arg(static_cast<int>(KernelType::kMmalaEuler))
    ->Arg(static_cast<int>(KernelType::kMmalaSimplified))
    ->Arg(static_cast<int>(KernelType::kMmalaOzaki))
    ->Unit(benchmark::kMicrosecond);

void BM_GeodesicPath(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(geodesic_between({0.0, 1.0}, {5.0, 3.0}, 25));
}
BENCHMARK(BM_GeodesicPath);

void BM_UnivariateSmc(benchmark::State& state) {
  auto spec = tools::default_spec("uni-infer");
  spec.smc.particles = static_cast<std::size_t>(state.range(0));
  const auto setup = tools::inference_setup(spec);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        tools::run_inference(spec, setup, 1, KernelType::kMmalaEuler, spec.populations, 1));
}
BENCHMARK(BM_UnivariateSmc)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

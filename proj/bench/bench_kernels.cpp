// Serial reference against the OpenMP path for the replication-heavy kernels.
// The second argument of every benchmark is the worker count (1 = serial).

#include <benchmark/benchmark.h>

#include "epsim/bridge.hpp"
#include "epsim/coupling.hpp"
#include "epsim/empirical.hpp"
#include "epsim/experiments.hpp"

using namespace epsim;

namespace {

const ClassModel& model() {
  static const ClassModel m(FunctionClass::intervals(), Distribution::beta(2.0, 5.0));
  return m;
}

void BM_DistanceMatrix(benchmark::State& state) {
  const auto mesh = model().function_class().verification_mesh(static_cast<std::size_t>(state.range(0)));
  const ExecPolicy policy{static_cast<int>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(model().distance_matrix(mesh, policy));
}

void BM_MuN(benchmark::State& state) {
  const auto ps = build_pairset(model(), 0.2, model().function_class().verification_mesh(32));
  const ExecPolicy policy{static_cast<int>(state.range(1))};
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mu_n_estimate(model(), ps, n, 200, 1, SignMethod::MonteCarlo, policy));
}

void BM_Mu(benchmark::State& state) {
  const auto ps = build_pairset(model(), 0.2, model().function_class().verification_mesh(64));
  const ExecPolicy policy{static_cast<int>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(mu_estimate(model(), ps, static_cast<std::size_t>(state.range(0)), 1, policy));
}

void BM_GaussApprox(benchmark::State& state) {
  ExperimentConfig c;
  c.n_grid = {static_cast<std::size_t>(state.range(0))};
  c.replications = 64;
  c.workers = static_cast<int>(state.range(1));
  c.coupling.mesh_size = 128;
  for (auto _ : state) benchmark::DoNotOptimize(run_gauss_approx(c));
}

void BM_ConstantChecks(benchmark::State& state) {
  const ExecPolicy policy{static_cast<int>(state.range(1))};
  for (auto _ : state) {
    benchmark::DoNotOptimize(explicit_constant_checks(static_cast<std::size_t>(state.range(0)), 1, policy));
  }
}

}  // namespace

BENCHMARK(BM_DistanceMatrix)->ArgsProduct({{256, 1024}, {1, 2, 4}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MuN)->ArgsProduct({{1000, 10000}, {1, 2, 4}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Mu)->ArgsProduct({{2000}, {1, 2, 4}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GaussApprox)->ArgsProduct({{4096}, {1, 2, 4}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConstantChecks)->ArgsProduct({{5000}, {1, 2, 4}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

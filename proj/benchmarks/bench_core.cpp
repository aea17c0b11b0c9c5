#include <benchmark/benchmark.h>

#include <vector>

#include "gkp/breeding.hpp"
#include "gkp/factory.hpp"
#include "gkp/gps.hpp"
#include "gkp/specfun.hpp"
#include "gkp/targets.hpp"

using namespace gkp;

namespace {

const gps::GpsParams& row1() {
  static const auto p = gps::solve_params(1.3, 5, 10, 20).params;
  return p;
}

const factory::FactoryContext& context() {
  static const factory::FactoryContext ctx(factory::FactoryConfig{}, row1());
  return ctx;
}

void BM_HermiteTable(benchmark::State& state) {
  const auto x = GridSpec{}.positions();
  for (auto _ : state) {
    specfun::HermiteTable t(int(state.range(0)), x);
    benchmark::DoNotOptimize(t.row(0).data());
  }
}
BENCHMARK(BM_HermiteTable)->Arg(20)->Arg(60);

void BM_ToMomentum(benchmark::State& state) {
  const GridSpec g{25.0, std::size_t(state.range(0))};
  const auto v = chi_target(1.3, 20, 5, g);
  for (auto _ : state) benchmark::DoNotOptimize(to_momentum(v));
}
BENCHMARK(BM_ToMomentum)->Arg(4096)->Arg(8192);

void BM_EffectiveSqueezing(benchmark::State& state) {
  const auto v = chi_target(1.3, 20, 5, GridSpec{});
  for (auto _ : state) benchmark::DoNotOptimize(effective_squeezing(v));
}
BENCHMARK(BM_EffectiveSqueezing);

void BM_HeraldedStateExact(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(gps::heralded_state_exact(row1(), 20, GridSpec{}));
}
BENCHMARK(BM_HeraldedStateExact)->Unit(benchmark::kMillisecond);

void BM_PhotonDistribution(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(gps::photon_distribution(row1(), 60));
}
BENCHMARK(BM_PhotonDistribution)->Unit(benchmark::kMillisecond);

void BM_HomodyneDensity(benchmark::State& state) {
  const auto& in = context().input(20);
  for (auto _ : state) benchmark::DoNotOptimize(breeding::homodyne_density(in, in, 0.5, 512));
}
BENCHMARK(BM_HomodyneDensity)->Unit(benchmark::kMillisecond);

void BM_OptimizeCorrection(benchmark::State& state) {
  const auto v = chi_target(1.3, 20, 5, GridSpec{});
  for (auto _ : state) benchmark::DoNotOptimize(breeding::optimize_correction(v, 1));
}
BENCHMARK(BM_OptimizeCorrection)->Unit(benchmark::kMillisecond);

void BM_ConditionedTrial(benchmark::State& state) {
  std::uint64_t t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(factory::run_conditioned_trial(context(), t++));
}
BENCHMARK(BM_ConditionedTrial)->Unit(benchmark::kMillisecond);

void BM_CountTrial(benchmark::State& state) {
  std::uint64_t t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(factory::run_trial(context(), t++, {.count_only = true}));
}
BENCHMARK(BM_CountTrial);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <cmath>

#include "nrmi/posterior.hpp"
#include "nrmi/sampler.hpp"

using namespace nrmi;

namespace {

Partition p1_sample(std::size_t n) {
  Rng rng(1, n);
  return partition_of(TrueDistribution::p1().sample(n, rng));
}

void BM_FergusonKlass(benchmark::State& state) {
  const auto spec = IntensitySpec::nggp(1.0, 0.5, 1.0);
  const auto policy = TruncationPolicy::relative_tail(1.0 / static_cast<double>(state.range(0)));
  Rng rng(2);
  std::size_t jumps = 0;
  for (auto _ : state) {
    const auto series = ferguson_klass(spec, 0.0, policy, rng, false);
    jumps += series.jumps.size();
    benchmark::DoNotOptimize(series.retained);
  }
  state.counters["jumps"] = benchmark::Counter(static_cast<double>(jumps), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_FergusonKlass)->Arg(10)->Arg(100)->Arg(1000);

void BM_LatentDensity(benchmark::State& state) {
  const auto spec = IntensitySpec::nggp(1.0, 0.5, 1.0);
  const auto partition = p1_sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_latent_density(spec, partition).log_norm_const());
}
BENCHMARK(BM_LatentDensity)->Arg(100)->Arg(10000)->Arg(1000000);

void BM_PosteriorMoment(benchmark::State& state) {
  const auto spec = IntensitySpec::gdp(1.0, 3);
  const auto density = build_latent_density(spec, p1_sample(1000));
  const auto set = SetDescriptor::interval(1.5, 3.5);
  const auto m = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(posterior_moment(density, set, m));
}
BENCHMARK(BM_PosteriorMoment)->DenseRange(1, 4);

void BM_TemperedStable(benchmark::State& state) {
  Rng rng(3);
  const double c = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_tempered_stable(1.0, 0.5, c, rng));
}
BENCHMARK(BM_TemperedStable)->Arg(1)->Arg(100)->Arg(10000);

void BM_ExactSetDraw(benchmark::State& state) {
  const auto density = build_latent_density(IntensitySpec::nggp(1.0, 0.5, 1.0), p1_sample(1000));
  const SetProbabilitySampler sampler(density, SetDescriptor::interval(2.0, INFINITY));
  Rng rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(sampler(rng).value);
}
BENCHMARK(BM_ExactSetDraw);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <random>

#include "presence/features.hpp"
#include "presence/kde_bayes.hpp"
#include "presence/selftrain.hpp"
#include "presence/simulator.hpp"

using namespace presence;

namespace {

PowerTrace simulated(int days) {
  auto p = preset("user17");
  p.days = days;
  return simulate_user(p, 1).power;
}

void BM_ComputeFeatures(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(80.0, 5.0);
  std::vector<double> w(static_cast<std::size_t>(state.range(0)));
  for (auto& x : w) x = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(compute_features(w));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ComputeFeatures)->Arg(60)->Arg(600);

void BM_BuildViews(benchmark::State& state) {
  const auto trace = simulated(1);
  for (auto _ : state) benchmark::DoNotOptimize(build_views(trace, WindowSpec{}));
}
BENCHMARK(BM_BuildViews)->Unit(benchmark::kMillisecond);

void BM_KdeDensity(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> xs(static_cast<std::size_t>(state.range(0)));
  for (auto& x : xs) x = g(rng);
  const double h = select_bandwidth(xs);
  double q = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kde_density(xs, h, q));
    q = q > 3.0 ? -3.0 : q + 0.01;
  }
}
BENCHMARK(BM_KdeDensity)->Arg(1000)->Arg(20000);

void BM_FitAndVote(benchmark::State& state) {
  const auto fm = build_views(simulated(static_cast<int>(state.range(0))), WindowSpec{});
  const auto labels = init_from_prior(PriorSchedule(), fm.window_starts());
  for (auto _ : state) benchmark::DoNotOptimize(fit_and_vote(fm, labels, labels.labels(), {}));
}
BENCHMARK(BM_FitAndVote)->Arg(7)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_RunPresenceSense(benchmark::State& state) {
  const auto fm = build_views(simulated(7), WindowSpec{});
  for (auto _ : state) benchmark::DoNotOptimize(run_presence_sense(fm, PriorSchedule(), {}));
}
BENCHMARK(BM_RunPresenceSense)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

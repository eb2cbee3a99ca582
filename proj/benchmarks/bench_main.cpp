#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "mradlab/effective_limit.hpp"
#include "mradlab/philox.hpp"
#include "mradlab/simulation.hpp"
#include "mradlab/survival_engine.hpp"
#include "mradlab/tail_inference.hpp"
#include "mradlab/trend_analysis.hpp"

using namespace mradlab;

namespace {

std::vector<double> gpd_sample(std::size_t n, double xi, double sigma) {
  PhiloxStream s(1, 0);
  std::vector<double> x(n);
  for (auto& v : x) v = sigma / xi * std::expm1(-xi * std::log(s.next_double()));
  return x;
}

void BM_PhiloxBlock(benchmark::State& state) {
  Philox4x32::Counter c{0, 1, 2, 3};
  for (auto _ : state) {
    benchmark::DoNotOptimize(c = Philox4x32::generate(c, {7, 9}));
  }
  state.SetItemsProcessed(state.iterations() * 4);
}
BENCHMARK(BM_PhiloxBlock);

void BM_CohortExceedance(benchmark::State& state) {
  const auto m = HazardModel::sigmoid();
  const auto plan = ExposurePlan::uniform(110.0, 1970, state.range(0), 30);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cohort_exceedance(m, plan, 125.3));
  }
}
BENCHMARK(BM_CohortExceedance)->Arg(1)->Arg(50);

void BM_SolveEffectiveLimit(benchmark::State& state) {
  const auto m = HazardModel::plateau(0.47);
  const auto plan = ExposurePlan::uniform(110.0, 1970, 40, 35);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_effective_limit(m, plan, 1e-6).limit_age);
  }
}
BENCHMARK(BM_SolveEffectiveLimit);

void BM_FitGpd(benchmark::State& state) {
  const auto x = gpd_sample(static_cast<std::size_t>(state.range(0)), -0.2, 1.5);
  GpdFitOptions opt;
  opt.profile_ci = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_gpd(x, 110.0, opt).shape);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FitGpd)->Arg(500)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_FitGpdWithProfileCi(benchmark::State& state) {
  const auto x = gpd_sample(10000, -0.2, 1.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_gpd(x, 110.0).shape_ci);
  }
}
BENCHMARK(BM_FitGpdWithProfileCi)->Unit(benchmark::kMillisecond);

void BM_FitSegmented(benchmark::State& state) {
  std::vector<double> years, values;
  PhiloxStream s(3, 0);
  for (int y = 1968; y <= 2015; ++y) {
    years.push_back(y);
    values.push_back(114.0 + (y <= 1994 ? 0.7 : 0.2) * (y - 1994) +
                     s.next_double() - 0.5);
  }
  SegmentedOptions opt;
  opt.joined = state.range(0) == 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_segmented(years, values, opt).break_year);
  }
}
BENCHMARK(BM_FitSegmented)->Arg(0)->Arg(1);

void BM_SimulateAges(benchmark::State& state) {
  SimulationConfig cfg;
  cfg.model = HazardModel::plateau(0.53);
  cfg.plan = ExposurePlan::uniform(110.0, 1970, 40, 35);
  cfg.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_ages(cfg, 0).size());
  }
  state.SetItemsProcessed(state.iterations() * 1400);
}
BENCHMARK(BM_SimulateAges);

}  // namespace
BENCHMARK_MAIN();

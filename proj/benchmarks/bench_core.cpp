#include <benchmark/benchmark.h>

#include "nmixprev/genprocess.hpp"
#include "nmixprev/mle.hpp"
#include "nmixprev/nmixture.hpp"
#include "nmixprev/powerlaw.hpp"
#include "nmixprev/rng.hpp"

using namespace nmixprev;

namespace {

ReportHistogram desk_histogram() {
  const auto truth = generate_model_truth({{2.5, 2000}, 0.1}, 50000, 11);
  return simulate_reports(truth, 0.1, 12).hist;
}

void BM_NmixLogPmf(benchmark::State& state) {
  const ModelParams params{{2.5, static_cast<int>(state.range(0))}, 0.1};
  LikelihoodWorkspace ws;
  int k = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nmix_log_pmf(k, params, ws));
    k = k % 20 + 1;
  }
}
BENCHMARK(BM_NmixLogPmf)->Arg(2000)->Arg(20000);

void BM_LogLikelihood(benchmark::State& state) {
  const auto hist = desk_histogram();
  LikelihoodWorkspace ws;
  double s = 2.0;
  for (auto _ : state) {
    const ModelParams params{{s, static_cast<int>(state.range(0))}, 0.1};
    benchmark::DoNotOptimize(log_likelihood(hist, params, true, ws));
    s = s < 3.0 ? s + 0.01 : 2.0;  // defeat the normalizer cache
  }
}
BENCHMARK(BM_LogLikelihood)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_FitDesk(benchmark::State& state) {
  const auto hist = desk_histogram();
  FitConfig config;
  config.n_max_ceiling = 4000;
  for (auto _ : state) benchmark::DoNotOptimize(fit(hist, config));
}
BENCHMARK(BM_FitDesk)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_Attachment(benchmark::State& state) {
  std::uint64_t seed = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate_attachment({0.1, 20000}, seed++));
}
BENCHMARK(BM_Attachment)->Unit(benchmark::kMillisecond);

void BM_PowerLawSample(benchmark::State& state) {
  const PowerLawParams params{2.5, 20000};
  const PowerLawSampler sampler(params);
  Rng rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(sampler.draw(rng));
}
BENCHMARK(BM_PowerLawSample);

void BM_Binomial(benchmark::State& state) {
  Rng rng(5);
  for (auto _ : state)
    benchmark::DoNotOptimize(rng.binomial(state.range(0), 0.1));
}
BENCHMARK(BM_Binomial)->Arg(3)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();

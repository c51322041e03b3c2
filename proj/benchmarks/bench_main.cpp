#include <benchmark/benchmark.h>

#include <random>

#include "wellcap/dataset.hpp"
#include "wellcap/fit.hpp"
#include "wellcap/model.hpp"

using namespace wellcap;

namespace {

std::vector<data::WellRecord> wells(int blocks, int times, int n) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> b(0, blocks - 1), t(0, times - 1);
  std::lognormal_distribution<double> oil(5.5, 0.6), water(16.5, 0.5), sand(16.0, 0.5),
      lateral(9.2, 0.3);
  std::vector<data::WellRecord> out;
  for (int i = 0; i < n; ++i) {
    const int bi = i < blocks ? i : b(rng);
    const int ti = i < times ? i : t(rng);
    std::string loc = "DN87";
    loc += static_cast<char>('a' + bi % 24);
    loc += static_cast<char>('a' + bi / 24 % 24);
    out.push_back({"W" + std::to_string(i),
                   std::chrono::year_month_day{std::chrono::year{2015 + ti}, std::chrono::month{6},
                                               std::chrono::day{1}},
                   grid::Locator6::parse(loc), oil(rng), water(rng), sand(rng), lateral(rng),
                   data::WellType::horizontal});
  }
  return out;
}

data::PreparedDataset prepared(ModelKind kind, int blocks, int times, int n) {
  return data::run_pipeline(wells(blocks, times, n), data::PipelinePolicy::defaults_for(kind), kind)
      .dataset;
}

void BM_Gradient(benchmark::State& state) {
  const auto kind = static_cast<ModelKind>(state.range(0));
  const auto d = prepared(kind, 400, 10, 4000);
  const model::Model m(kind, model::ModelData::from(d), model::PriorConfig::defaults_for(kind));
  std::vector<double> p(m.dim(), 0.1), g(m.dim());
  for (auto _ : state) benchmark::DoNotOptimize(m.log_posterior_gradient(p, g));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.size()));
}
BENCHMARK(BM_Gradient)->Arg(0)->Arg(1)->Arg(2);

void BM_Pipeline(benchmark::State& state) {
  const auto w = wells(400, 10, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        data::run_pipeline(w, data::PipelinePolicy::defaults_for(ModelKind::expanded), ModelKind::expanded));
  }
}
BENCHMARK(BM_Pipeline)->Arg(1000)->Arg(4000);

void BM_Fit(benchmark::State& state) {
  const auto d = prepared(ModelKind::spatio_temporal, 20, 6, 1000);
  sampler::SamplerConfig cfg;
  cfg.draws_per_chain = 1000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sampler::fit(ModelKind::spatio_temporal, d,
                                          model::PriorConfig::defaults_for(ModelKind::spatio_temporal), cfg));
  }
}
BENCHMARK(BM_Fit)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace
BENCHMARK_MAIN();

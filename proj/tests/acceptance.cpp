// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "wellcap/cli/simulate.hpp"
#include "wellcap/dataset.hpp"
#include "wellcap/diagnostics.hpp"
#include "wellcap/fit.hpp"
#include "wellcap/grid.hpp"
#include "wellcap/model.hpp"
#include "wellcap/report.hpp"

using namespace wellcap;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const ModelKind kKinds[] = {ModelKind::spatial, ModelKind::spatio_temporal, ModelKind::expanded};

// 1 -------------------------------------------------------------------------
Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::mt19937_64 rng(1001);
  for (ModelKind kind : kKinds) {
    const auto d = fixture::random_dataset(kind, 5, 4, 50, 31);
    const model::PriorConfig prior = model::PriorConfig::defaults_for(kind);
    const model::Model m(kind, model::ModelData::from(d), prior);
    const oracle::Data od = oracle::copy(m.data());
    for (int rep = 0; rep < 100; ++rep) {
      const auto p = fixture::uniform_point(m.dim(), rng);
      const auto g = m.grad_log_posterior(p);
      const auto fd = oracle::central_difference(
          [&](const std::vector<oracle::ld>& x) { return oracle::log_posterior(kind, x, od, prior); }, p, 1e-5L);
      for (std::size_t j = 0; j < g.size(); ++j) {
        const double ref = static_cast<double>(fd[j]);
        worst = std::max(worst, std::abs(g[j] - ref) / std::max(1.0, std::abs(ref)));
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-6 && secs < 30.0, fmt("max relative error %.2e over 3 kinds x 100 points, %.1f s", worst, secs)};
}

// 2 -------------------------------------------------------------------------
Outcome conjugate_oracle() {
  const auto t0 = Clock::now();
  const int n = 25;
  std::mt19937_64 rng(2002);
  std::normal_distribution<double> z(0.7, 1.0);
  std::vector<double> y(n), l(n, 0.0), w_bar{0.0};
  std::vector<int> b(n, 0);
  for (double& v : y) v = z(rng);

  model::ModelData md;
  md.y = y;
  md.l = l;
  md.block_of = b;
  md.blocks = 1;
  md.w_bar_b = w_bar;
  model::PriorConfig prior;
  prior.scale_loc = 1.0;           // alpha ~ Normal(0, 1)
  prior.sigma_y_location = 1.0;    // sigma_Y pinned at 1
  prior.scale_sigma = 1e-3;
  prior.scale_walk = 1.0;
  const model::Model m(ModelKind::spatial, md, prior);

  // alpha | y ~ Normal(sum(y) / (n + 1), 1 / sqrt(n + 1)) with sigma_Y = 1
  double sum = 0;
  for (double v : y) sum += v;
  const double post_mean = sum / (n + 1);
  const double post_sd = 1.0 / std::sqrt(n + 1.0);

  sampler::SamplerConfig cfg;
  cfg.seed = 2002;
  const sampler::FitResult r = sampler::fit(m, cfg);
  const std::size_t a = m.layout().segment("alpha").offset;
  const auto chains = r.draws.parameter(a);
  const auto pooled = r.draws.pooled(a);
  const double mean = static_cast<double>(oracle::mean(pooled));
  const double sd = static_cast<double>(oracle::sample_sd(pooled));
  const double mcse = sampler::mcse_mean(chains);
  const double secs = seconds_since(t0);
  const bool ok = std::abs(mean - post_mean) <= 3 * mcse && std::abs(sd / post_sd - 1.0) <= 0.05 && secs < 60.0;
  return {ok, fmt("mean %.4f vs %.4f (3 MCSE = %.4f), sd %.4f vs %.4f, %.1f s", mean, post_mean, 3 * mcse, sd,
                  post_sd, secs)};
}

// 3 -------------------------------------------------------------------------
Outcome parameter_recovery() {
  const auto t0 = Clock::now();
  cli::SimulationSpec spec;  // kind B, B = 20, T = 6, N = 1000
  spec.seed = 3003;
  const cli::SimulationOutput sim = cli::simulate(spec);
  const auto d = data::run_pipeline(sim.wells, data::PipelinePolicy::defaults_for(spec.kind), spec.kind).dataset;

  sampler::SamplerConfig cfg;
  cfg.chains = 3;
  cfg.warmup = 500;
  cfg.draws_per_chain = 1500;
  cfg.seed = 3003;
  const sampler::FitResult r = sampler::fit(spec.kind, d, spec.prior, cfg);

  double max_rhat = 0;
  for (const auto& s : r.summary) max_rhat = std::max(max_rhat, s.rhat);
  const model::ParamLayout layout(spec.kind, spec.blocks, spec.times);
  auto covered = [&](const std::string& name) {
    const auto& seg = layout.segment(name);
    int hits = 0;
    for (std::size_t j = 0; j < seg.length; ++j) {
      const auto& s = r.summary[seg.offset + j];
      const double truth = sim.truth.params[seg.offset + j];
      hits += (s.q05 <= truth && truth <= s.q95) ? 1 : 0;
    }
    return hits;
  };
  const int alpha_hits = covered("alpha"), tau_hits = covered("tau");
  const double secs = seconds_since(t0);
  const bool ok = !std::isnan(max_rhat) && max_rhat <= 1.05 && r.divergences() == 0 &&
                  alpha_hits >= 16 && tau_hits >= 4 && secs < 300.0;
  return {ok, fmt("max R-hat %.4f, divergences %zu, alpha covered %d/20, tau covered %d/6, %.1f s", max_rhat,
                  r.divergences(), alpha_hits, tau_hits, secs)};
}

// 4 -------------------------------------------------------------------------
Outcome diagnostic_discrimination() {
  std::mt19937_64 rng(4004);
  std::normal_distribution<double> z(0.0, 1.0);
  auto chain = [&](double shift) {
    std::vector<double> x(1000);
    for (double& v : x) v = shift + z(rng);
    return x;
  };
  const double same = sampler::split_rhat({chain(0.0), chain(0.0)});
  const double offset = sampler::split_rhat({chain(0.0), chain(5.0)});
  return {same <= 1.01 && offset > 1.1, fmt("iid R-hat %.4f, offset R-hat %.4f", same, offset)};
}

// 5 -------------------------------------------------------------------------
Outcome pipeline_invariants() {
  double worst_mean = 0, worst_sd = 0;
  bool untouched = true, positive = true;
  auto check_z = [&](const std::vector<double>& v, int k) {
    if (v.empty()) return;
    worst_mean = std::max(worst_mean, std::abs(static_cast<double>(oracle::mean(v))));
    worst_sd = std::max(worst_sd, std::abs(static_cast<double>(oracle::sample_sd(v)) - 1.0 / k));
  };
  for (ModelKind kind : kKinds) {
    cli::SimulationSpec spec;
    spec.kind = kind;
    spec.prior = model::PriorConfig::defaults_for(kind);
    spec.times = kind == ModelKind::spatial ? 1 : 6;
    spec.zero_fraction = kind == ModelKind::expanded ? 0.15 : 0.0;
    spec.seed = 5005;
    const auto sim = cli::simulate(spec);
    const auto policy = data::PipelinePolicy::defaults_for(kind);
    const auto d = data::run_pipeline(sim.wells, policy, kind).dataset;
    for (const auto* v : {&d.y, &d.l, &d.w, &d.e, &d.ew, &d.es}) check_z(*v, policy.scale_k);

    if (kind == ModelKind::expanded) {
      const auto kept = data::filter_wells(sim.wells).kept;
      const auto imp = data::impute_zeros(kept, policy.imputation_grouping);
      for (std::size_t i = 0; i < kept.size(); ++i) {
        for (auto var : data::kAllVariables) {
          const double before = data::value_of(kept[i], var), after = data::value_of(imp.records[i], var);
          if (before != 0.0 && after != before) untouched = false;
          if (!(after > 0.0)) positive = false;
        }
      }
    }
  }
  const bool ok = worst_mean <= 1e-12 && worst_sd <= 1e-12 && untouched && positive;
  return {ok, fmt("max |mean| %.1e, max |sd - 1/k| %.1e, nonzero untouched: %s, kind C pre-log positive: %s",
                  worst_mean, worst_sd, untouched ? "yes" : "no", positive ? "yes" : "no")};
}

// 6 -------------------------------------------------------------------------
Outcome grid_round_trip() {
  std::mt19937_64 rng(6006);
  std::uniform_int_distribution<int> field(0, 17), digit(0, 9), sub(0, 23);
  int failures = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string code{static_cast<char>('A' + field(rng)), static_cast<char>('A' + field(rng)),
                     static_cast<char>('0' + digit(rng)), static_cast<char>('0' + digit(rng)),
                     static_cast<char>('a' + sub(rng)), static_cast<char>('a' + sub(rng))};
    const auto c = grid::block_center(grid::Locator6::parse(code));
    if (grid::encode_locator(c.lat, c.lon).str() != code) ++failures;
  }
  const std::string bakken = grid::encode_locator(47.5, -103.5).str();
  return {failures == 0 && bakken.rfind("DN87", 0) == 0,
          fmt("%d/1000 round-trip failures, (47.5, -103.5) -> %s", failures, bakken.c_str())};
}

// 7 -------------------------------------------------------------------------
Outcome partial_pooling() {
  cli::SimulationSpec spec;
  spec.blocks = 20;
  spec.times = 6;
  spec.wells = 500;
  spec.cell_concentration = 0.5;
  spec.seed = 7007;
  const auto sim = cli::simulate(spec);
  const auto d = data::run_pipeline(sim.wells, data::PipelinePolicy::defaults_for(spec.kind), spec.kind).dataset;

  std::size_t sparse = 0;
  for (auto c : sim.truth.cell_counts) sparse += c <= 2 ? 1 : 0;
  const double sparse_share = static_cast<double>(sparse) / sim.truth.cell_counts.size();

  sampler::SamplerConfig cfg;
  cfg.warmup = 500;
  cfg.draws_per_chain = 1000;
  cfg.seed = 7007;
  const auto r = sampler::fit(spec.kind, d, spec.prior, cfg);
  const auto pred = report::posterior_mean_predictions(r.draws, spec.kind, d);
  const auto model_table = report::estimate_table(pred, d);
  const auto raw_table = report::observed_table(d);

  // table rows follow the truth's block order; look each code up to be safe
  double se_model = 0, se_raw = 0;
  std::size_t cells = 0;
  for (std::size_t b = 0; b < sim.truth.block_codes.size(); ++b) {
    const std::size_t row = model_table.row_of(sim.truth.block_codes[b]);
    for (std::size_t t = 0; t < sim.truth.time_labels.size(); ++t) {
      const auto& truth = sim.truth.cell_means[b * sim.truth.time_labels.size() + t];
      const auto& est = model_table.at(row, t);
      const auto& raw = raw_table.at(row, t);
      if (!truth || !est || !raw) continue;
      se_model += (*est - *truth) * (*est - *truth);
      se_raw += (*raw - *truth) * (*raw - *truth);
      ++cells;
    }
  }
  const double mse_model = se_model / cells, mse_raw = se_raw / cells;
  return {sparse_share >= 0.30 && mse_model < mse_raw,
          fmt("%.0f%% of cells have <= 2 wells; MSE model %.1f vs raw %.1f over %zu cells", 100 * sparse_share,
              mse_model, mse_raw, cells)};
}

// 8 -------------------------------------------------------------------------
struct Dn87Row {
  const char* code;
  std::vector<std::optional<double>> model, observed;  // 2015..2024
};

std::vector<Dn87Row> dn87_fixture() {
  const std::optional<double> NA;
  auto row = [&](const char* c, int col, double m, double o) {
    Dn87Row r{c, std::vector<std::optional<double>>(10, NA), std::vector<std::optional<double>>(10, NA)};
    r.model[col] = m;
    r.observed[col] = o;
    return r;
  };
  std::vector<Dn87Row> rows{row("DN87au", 0, 234, 222), row("DN87cm", 0, 343, 347), row("DN87cq", 0, 357, 354),
                             row("DN87cw", 0, 308, 295), row("DN87dd", 2, 460, 378), row("DN87df", 0, 189, 91),
                             row("DN87dq", 0, 243, 210), row("DN87dw", 0, 234, 147), row("DN87dx", 0, 140, 217),
                             row("DN87ef", 3, 360, 273)};
  rows[8].model[1] = 239;
  rows[8].observed[1] = 132;
  return rows;
}

Outcome report_fidelity() {
  const auto rows = dn87_fixture();
  std::vector<data::WellRecord> wells;
  std::map<std::string, double> model_value;  // by well id
  for (const auto& r : rows) {
    for (int t = 0; t < 10; ++t) {
      if (!r.observed[t]) continue;
      const std::string id = std::string(r.code) + "-" + std::to_string(2015 + t);
      wells.push_back(fixture::well(id, 2015 + t, r.code, *r.observed[t], 1e6, 1e6, 9000));
      model_value[id] = *r.model[t];
    }
  }
  // wells elsewhere so every year 2015-2024 is a period of the data set
  for (int t = 0; t < 10; ++t) {
    wells.push_back(fixture::well("F" + std::to_string(t), 2015 + t, "DN88aa", 200 + 10 * t, 2e6, 1e6, 8000));
  }
  const auto d = data::run_pipeline(wells, data::PipelinePolicy::defaults_for(ModelKind::spatio_temporal),
                                    ModelKind::spatio_temporal)
                     .dataset;
  std::vector<double> pred(d.size(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto it = model_value.find(d.well_ids[i]);
    pred[i] = it == model_value.end() ? 250.0 : it->second;
  }
  const auto est = report::estimate_table(pred, d).rows_with_prefix("DN87");
  const auto obs = report::observed_table(d).rows_with_prefix("DN87");

  bool layout = est.rows() == rows.size() && obs.rows() == rows.size() && est.cols() == 10;
  for (std::size_t b = 0; layout && b < rows.size(); ++b) {
    layout = est.block_codes[b] == rows[b].code && obs.block_codes[b] == rows[b].code;
    for (int t = 0; layout && t < 10; ++t) {
      layout = est.at(b, t) == rows[b].model[t] && obs.at(b, t) == rows[b].observed[t];
    }
  }
  const std::string csv = obs.to_csv(0);
  layout = layout && csv.rfind("MHB,2015,2016,2017,2018,2019,2020,2021,2022,2023,2024\n"
                               "DN87au,222,NA,NA,NA,NA,NA,NA,NA,NA,NA\n", 0) == 0;

  const auto m = report::aggregate_blocks(est, {"DN87au", "DN87cm"}, report::Weighting::equal);
  const auto o = report::aggregate_blocks(obs, {"DN87au", "DN87cm"}, report::Weighting::equal);
  const bool values = m[0] && o[0] && *m[0] == 288.5 && *o[0] == 284.5;
  return {layout && values, fmt("NA layout %s; DN87au+DN87cm 2015: model %.1f, observed %.1f",
                                layout ? "matches" : "differs", m[0].value_or(NAN), o[0].value_or(NAN))};
}

// 9 -------------------------------------------------------------------------
Outcome predictive_plumbing() {
  bool exact = true;
  std::mt19937_64 rng(9009);
  for (ModelKind kind : kKinds) {
    const auto d = fixture::random_dataset(kind, 4, 3, 40, 9);
    const model::Model m(kind, model::ModelData::from(d), model::PriorConfig::defaults_for(kind));
    const auto p = fixture::uniform_point(m.dim(), rng, 0.5);
    sampler::PosteriorDraws one;
    one.chains = 1;
    one.draws_per_chain = 1;
    one.dim = p.size();
    one.values = p;
    const auto pred = report::posterior_mean_predictions(one, kind, d);
    const auto mu = m.predict_mean(p);
    for (std::size_t i = 0; i < d.size(); ++i) exact = exact && pred[i] == d.to_original_outcome(mu[i]);
  }

  const auto d = fixture::random_dataset(ModelKind::spatio_temporal, 3, 3, 12, 10);
  const model::Model m(ModelKind::spatio_temporal, model::ModelData::from(d),
                       model::PriorConfig::defaults_for(ModelKind::spatio_temporal));
  auto p = fixture::uniform_point(m.dim(), rng, 0.5);
  p[m.layout().segment("log_sigma_y").offset] = std::log(0.35);
  std::vector<double> first(10000);
  for (double& v : first) v = m.posterior_predictive_draw(p, rng)[0];
  const double sd = static_cast<double>(oracle::sample_sd(first));
  const bool ok = exact && std::abs(sd / 0.35 - 1.0) <= 0.03;
  return {ok, fmt("single-draw predictions %s; predictive sd %.4f vs sigma_Y 0.35",
                  exact ? "exact" : "differ", sd)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradient_correctness},
      {"conjugate oracle", conjugate_oracle},
      {"parameter recovery", parameter_recovery},
      {"diagnostic discrimination", diagnostic_discrimination},
      {"pipeline invariants", pipeline_invariants},
      {"grid round trip", grid_round_trip},
      {"partial-pooling benefit", partial_pooling},
      {"report fidelity", report_fidelity},
      {"posterior predictive plumbing", predictive_plumbing},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

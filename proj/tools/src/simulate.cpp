#include "wellcap/cli/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "wellcap/errors.hpp"
#include "wellcap/stats.hpp"

namespace wellcap::cli {

namespace {

// Subsquares of DN80..DN89; 576 per square.
constexpr int kSubsquaresPerSquare = 24 * 24;
constexpr int kLocatorPool = 10 * kSubsquaresPerSquare;

std::string pool_locator(int i) {
  const int square = i / kSubsquaresPerSquare;
  const int sub = i % kSubsquaresPerSquare;
  std::string code = "DN8";
  code += static_cast<char>('0' + square);
  code += static_cast<char>('a' + sub % 24);
  code += static_cast<char>('a' + sub / 24);
  return code;
}

}  // namespace

void SimulationSpec::validate() const {
  if (blocks < 1 || times < 1) throw DomainError("simulation needs blocks >= 1 and times >= 1");
  if (has_time_effects(kind) && times < 2) {
    throw DomainError("kind " + to_string(kind) + " needs at least two time periods");
  }
  if (blocks > kLocatorPool) {
    throw DomainError("simulation supports at most " + std::to_string(kLocatorPool) + " blocks");
  }
  if (wells < 2 || wells < static_cast<std::size_t>(std::max(blocks, times))) {
    throw DomainError("simulation needs at least max(2, blocks, times) wells");
  }
  if (!(cell_concentration > 0.0)) throw DomainError("cell concentration must be positive");
  if (!(zero_fraction >= 0.0 && zero_fraction < 1.0)) {
    throw DomainError("zero fraction must lie in [0, 1)");
  }
  if (!(lateral_log_sd >= 0.0 && water_log_sd >= 0.0 && sand_log_sd >= 0.0)) {
    throw DomainError("covariate log sds must be non-negative");
  }
  if (first_year < 1900 || first_year + times > 9999) throw DomainError("bad first year");
  prior.validate();
}

double SyntheticTruth::sigma_y() const {
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == "log_sigma_y") return std::exp(params[k]);
  }
  throw DomainError("truth has no log_sigma_y");
}

nlohmann::json SyntheticTruth::to_json() const {
  nlohmann::json j;
  j["format"] = "wellcap-truth/1";
  j["kind"] = to_string(spec.kind);
  j["blocks"] = spec.blocks;
  j["times"] = spec.times;
  j["wells"] = spec.wells;
  j["seed"] = spec.seed;
  j["first_year"] = spec.first_year;
  j["cell_concentration"] = spec.cell_concentration;
  j["zero_fraction"] = spec.zero_fraction;
  j["covariates"] = {
      {"lateral_log_mean", spec.lateral_log_mean}, {"lateral_log_sd", spec.lateral_log_sd},
      {"water_log_mean", spec.water_log_mean},     {"water_log_sd", spec.water_log_sd},
      {"sand_log_mean", spec.sand_log_mean},       {"sand_log_sd", spec.sand_log_sd}};
  j["outcome"] = {{"center", outcome_center}, {"scale", outcome_scale}};
  nlohmann::json fit = nlohmann::json::object(), gen = nlohmann::json::object();
  for (std::size_t k = 0; k < names.size(); ++k) {
    fit[names[k]] = params[k];
    gen[names[k]] = generating_params[k];
  }
  j["params"] = fit;
  j["generating_params"] = gen;
  j["block_codes"] = block_codes;
  j["time_labels"] = time_labels;
  j["cell_counts"] = cell_counts;
  nlohmann::json means = nlohmann::json::array();
  for (const auto& m : cell_means) means.push_back(m ? nlohmann::json(*m) : nlohmann::json());
  j["cell_means"] = means;
  return j;
}

SimulationOutput simulate(const SimulationSpec& spec) {
  spec.validate();
  const int B = spec.blocks;
  const int T = spec.times;
  const std::size_t N = spec.wells;
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed),
                    static_cast<std::uint32_t>(spec.seed >> 32), 0x51u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<int> pool(kLocatorPool);
  std::iota(pool.begin(), pool.end(), 0);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(B);
  std::sort(pool.begin(), pool.end());
  std::vector<grid::Locator6> codes;
  for (int i : pool) codes.push_back(grid::Locator6::parse(pool_locator(i)));

  // Every block and period gets a well; the rest follow Dirichlet cell weights.
  std::vector<double> weights(static_cast<std::size_t>(B) * T);
  std::gamma_distribution<double> gamma(spec.cell_concentration, 1.0);
  for (double& w : weights) w = gamma(rng);
  if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; })) {
    std::fill(weights.begin(), weights.end(), 1.0);
  }
  std::discrete_distribution<std::size_t> pick_cell(weights.begin(), weights.end());
  const std::size_t seeded = static_cast<std::size_t>(std::max(B, T));

  std::uniform_int_distribution<unsigned> month(1, 12), day(1, 28);
  std::vector<data::WellRecord> wells;
  wells.reserve(N);
  for (std::size_t i = 0; i < N; ++i) {
    int b, t;
    if (i < seeded) {
      b = static_cast<int>(i % B);
      t = static_cast<int>(i % T);
    } else {
      const std::size_t cell = pick_cell(rng);
      b = static_cast<int>(cell / T);
      t = static_cast<int>(cell % T);
    }
    data::WellRecord r{
        "W" + std::to_string(100000 + i),
        std::chrono::year_month_day{std::chrono::year{spec.first_year + t},
                                    std::chrono::month{month(rng)}, std::chrono::day{day(rng)}},
        codes[b]};
    r.lateral = std::max(1.0, std::round(std::exp(spec.lateral_log_mean +
                                                  spec.lateral_log_sd * normal(rng))));
    r.water = std::round(std::exp(spec.water_log_mean + spec.water_log_sd * normal(rng)));
    r.sand = std::round(std::exp(spec.sand_log_mean + spec.sand_log_sd * normal(rng)));
    if (spec.zero_fraction > 0.0) {
      if (unit(rng) < spec.zero_fraction) r.water = 0.0;
      if (unit(rng) < spec.zero_fraction) r.sand = 0.0;
    }
    r.oil = 1.0 + static_cast<double>(i);  // placeholder, replaced below
    wells.push_back(std::move(r));
  }

  // Covariate design does not depend on the outcome, so the placeholder
  // outcome gives the same l, intensities and group averages the fit sees.
  const data::PipelinePolicy policy = data::PipelinePolicy::defaults_for(spec.kind);
  const data::PreparedDataset design = data::run_pipeline(wells, policy, spec.kind).dataset;
  const model::Model gen_model(spec.kind, model::ModelData::from(design), spec.prior);
  const model::ParamLayout& layout = gen_model.layout();

  std::vector<double> theta;
  if (spec.fixed_params) {
    if (spec.fixed_params->size() != layout.size()) {
      throw DimensionError("fixed parameters: expected " + std::to_string(layout.size()) +
                           " values, got " + std::to_string(spec.fixed_params->size()));
    }
    theta = *spec.fixed_params;
  } else {
    theta = gen_model.prior_draw(rng);
  }

  const std::vector<double> mu_design = gen_model.predict_mean(theta);
  const double sigma = gen_model.sigma_y(theta);
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < design.size(); ++i) row_of.emplace(design.well_ids[i], i);

  std::vector<double> mu(N), y_model(N);
  for (std::size_t i = 0; i < N; ++i) {
    mu[i] = mu_design[row_of.at(wells[i].well_id)];
    y_model[i] = mu[i] + sigma * normal(rng);
  }

  const bool logged = policy.log_transform;
  const double scale = logged ? 0.5 : 150.0;
  double center = logged ? std::log(300.0) : 300.0;
  if (!logged) {
    const double lowest = *std::min_element(y_model.begin(), y_model.end());
    center = std::max(center, 1.0 - scale * lowest);
  }
  auto to_original = [&](double working) { return logged ? std::exp(working) : working; };
  for (std::size_t i = 0; i < N; ++i) wells[i].oil = to_original(center + scale * y_model[i]);

  // Fit-scale truth: y_std = (center + scale * y_model - m) / (k s).
  std::vector<double> working(N);
  for (std::size_t i = 0; i < N; ++i) {
    working[i] = logged ? std::log(wells[i].oil) : wells[i].oil;
  }
  const double m = stats::mean(working);
  const double s = std::sqrt(stats::sample_variance(working));
  const double a = (center - m) / (policy.scale_k * s);
  const double g = scale / (policy.scale_k * s);

  std::vector<double> fit_theta = theta;
  for (const auto& seg : layout.segments()) {
    for (std::size_t j = 0; j < seg.length; ++j) {
      double& v = fit_theta[seg.offset + j];
      if (seg.name == "alpha") {
        v = a + g * v;
      } else if (seg.name.rfind("log_", 0) == 0) {
        v += std::log(g);
      } else {
        v *= g;
      }
    }
  }
  if (layout.has("tau")) {
    // alpha_b + tau_t is invariant under alpha += c, tau -= c; report the
    // representative the prior favours.
    const auto& al = layout.segment("alpha");
    const auto& ta = layout.segment("tau");
    const double loc2 = spec.prior.scale_loc * spec.prior.scale_loc;
    const double walk2 = spec.prior.scale_walk * spec.prior.scale_walk;
    double alpha_sum = 0.0;
    for (std::size_t j = 0; j < al.length; ++j) alpha_sum += fit_theta[al.offset + j];
    const double shift = (fit_theta[ta.offset] / walk2 - alpha_sum / loc2) /
                         (static_cast<double>(al.length) / loc2 + 1.0 / walk2);
    for (std::size_t j = 0; j < al.length; ++j) fit_theta[al.offset + j] += shift;
    for (std::size_t j = 0; j < ta.length; ++j) fit_theta[ta.offset + j] -= shift;
  }

  SimulationOutput out;
  SyntheticTruth& truth = out.truth;
  truth.spec = spec;
  truth.names = layout.names();
  truth.params = std::move(fit_theta);
  truth.generating_params = std::move(theta);
  for (const auto& c : design.block_codes) truth.block_codes.push_back(c.str());
  truth.time_labels = design.time_labels;
  truth.outcome_center = center;
  truth.outcome_scale = scale;

  const std::size_t cols = static_cast<std::size_t>(design.times());
  std::vector<double> sums(design.block_codes.size() * cols, 0.0);
  truth.cell_counts.assign(sums.size(), 0);
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t r = row_of.at(wells[i].well_id);
    const std::size_t t = design.time_of.empty() ? 0 : static_cast<std::size_t>(design.time_of[r]);
    const std::size_t cell = static_cast<std::size_t>(design.block_of[r]) * cols + t;
    sums[cell] += to_original(center + scale * mu[i]);
    ++truth.cell_counts[cell];
  }
  truth.cell_means.resize(sums.size());
  for (std::size_t c = 0; c < sums.size(); ++c) {
    if (truth.cell_counts[c] > 0) truth.cell_means[c] = sums[c] / truth.cell_counts[c];
  }
  out.wells = std::move(wells);
  return out;
}

}  // namespace wellcap::cli

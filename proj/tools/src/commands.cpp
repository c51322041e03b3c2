#include "wellcap/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "wellcap/cli/manifest.hpp"
#include "wellcap/csv.hpp"
#include "wellcap/errors.hpp"
#include "wellcap/fit.hpp"

namespace wellcap::cli {

namespace fs = std::filesystem;

namespace {

const char* granularity_name(data::TimeGranularity g) {
  return g == data::TimeGranularity::year ? "year" : "year_month";
}

const char* grouping_name(data::ImputationGrouping g) {
  return g == data::ImputationGrouping::prefix4 ? "prefix4" : "full6";
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw Error(what + " '" + p.string() + "' does not exist");
}

nlohmann::json rejection_json(const data::RejectionCounts& r) {
  return {{"not_horizontal", r.not_horizontal},   {"negative_oil", r.negative_oil},
          {"negative_water", r.negative_water},   {"negative_sand", r.negative_sand},
          {"nonpositive_lateral", r.nonpositive_lateral}, {"total", r.total()}};
}

nlohmann::json manifest(const std::string& command, const RunConfig& cfg,
                        const std::vector<fs::path>& inputs,
                        const std::vector<fs::path>& outputs) {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = cfg.to_json();
  j["seed"] = cfg.sampler.seed;
  j["inputs"] = nlohmann::json::array();
  for (const auto& p : inputs) j["inputs"].push_back(file_entry(p));
  j["outputs"] = nlohmann::json::array();
  for (const auto& p : outputs) j["outputs"].push_back(file_entry(p));
  return j;
}

std::string join_blocks(const std::vector<std::string>& blocks) {
  std::string s;
  for (const auto& b : blocks) s += (s.empty() ? "" : "+") + b;
  return s;
}

}  // namespace

fs::path RunConfig::dataset_path() const {
  return dataset.empty() ? output_dir / "dataset.json" : dataset;
}

fs::path RunConfig::draws_path() const {
  return draws.empty() ? output_dir / "draws.csv" : draws;
}

void RunConfig::validate() const {
  if (kind == ModelKind::expanded && !policy.log_transform) {
    throw DomainError("model kind C works on logged variables; set log-transform=true");
  }
  if (policy.scale_k != 1 && policy.scale_k != 2) throw DomainError("scale-k must be 1 or 2");
  if (histogram_bins < 1) throw DomainError("histogram needs at least one bin");
  for (const auto& set : aggregations) {
    if (set.empty()) throw DomainError("empty aggregation request");
  }
  prior.validate();
  sampler.validate();
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json aggs = nlohmann::json::array();
  for (const auto& set : aggregations) aggs.push_back(set);
  return {
      {"input", input.string()},
      {"dataset", dataset_path().string()},
      {"draws", draws_path().string()},
      {"output_dir", output_dir.string()},
      {"kind", to_string(kind)},
      {"policy",
       {{"time_granularity", granularity_name(policy.time_granularity)},
        {"scale_k", policy.scale_k},
        {"log_transform", policy.log_transform},
        {"impute_zeros", policy.impute_zeros},
        {"imputation_grouping", grouping_name(policy.imputation_grouping)}}},
      {"prior",
       {{"scale_loc", prior.scale_loc},
        {"scale_walk", prior.scale_walk},
        {"scale_sigma", prior.scale_sigma},
        {"sigma_y_location", prior.sigma_y_location}}},
      {"sampler",
       {{"chains", sampler.chains},
        {"warmup", sampler.warmup},
        {"draws_per_chain", sampler.draws_per_chain},
        {"target_accept", sampler.target_accept},
        {"max_tree_depth", sampler.max_tree_depth},
        {"seed", sampler.seed},
        {"step_size_init", sampler.step_size_init},
        {"init_radius", sampler.init_radius},
        {"parallel_chains", sampler.parallel_chains}}},
      {"strict", strict},
      {"clamp_negative", clamp_negative},
      {"aggregations", aggs},
      {"aggregation_weighting",
       aggregation_weighting == report::Weighting::equal ? "equal" : "counts"},
      {"histogram_bins", histogram_bins},
      {"table_decimals", table_decimals},
  };
}

int cmd_preprocess(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  require_file(cfg.input, "input file");
  auto records = data::read_wells(cfg.input);
  const data::PipelineResult res = data::run_pipeline(std::move(records), cfg.policy, cfg.kind);
  const data::PreparedDataset& d = res.dataset;

  fs::create_directories(cfg.output_dir);
  const fs::path dataset_file = cfg.output_dir / "dataset.json";
  const fs::path report_file = cfg.output_dir / "preprocess_report.json";
  data::write_dataset(d, dataset_file);

  nlohmann::json imputed = nlohmann::json::object();
  for (auto v : data::kAllVariables) imputed[data::to_string(v)] = res.imputed[static_cast<int>(v)];
  const nlohmann::json report = {{"kind", to_string(cfg.kind)},
                                 {"input_rows", res.input_count},
                                 {"N", d.size()},
                                 {"B", d.blocks()},
                                 {"T", d.times()},
                                 {"rejected", rejection_json(res.rejected)},
                                 {"imputed", imputed}};
  write_json(report, report_file);
  write_json(manifest("preprocess", cfg, {cfg.input}, {dataset_file, report_file}),
             cfg.output_dir / "preprocess_manifest.json");

  log << "read " << res.input_count << " rows; kept N=" << d.size() << " wells in B="
      << d.blocks() << " blocks, T=" << d.times() << " periods\n";
  log << "rejected " << res.rejected.total() << " (not horizontal "
      << res.rejected.not_horizontal << ", negative oil " << res.rejected.negative_oil
      << ", negative water " << res.rejected.negative_water << ", negative sand "
      << res.rejected.negative_sand << ", lateral <= 0 " << res.rejected.nonpositive_lateral
      << ")\n";
  if (cfg.policy.impute_zeros) {
    log << "imputed zeros:";
    for (auto v : data::kAllVariables) {
      log << ' ' << data::to_string(v) << '=' << res.imputed[static_cast<int>(v)];
    }
    log << '\n';
  }
  log << "wrote " << dataset_file.string() << '\n';
  return kSuccess;
}

int cmd_simulate(const SimulationSpec& spec, const RunConfig& cfg, std::ostream& log) {
  const SimulationOutput sim = simulate(spec);
  fs::create_directories(cfg.output_dir);
  const fs::path wells_file = cfg.output_dir / "wells.csv";
  const fs::path truth_file = cfg.output_dir / "truth.json";
  data::write_wells(sim.wells, wells_file);
  write_json(sim.truth.to_json(), truth_file);

  nlohmann::json m;
  m["command"] = "simulate";
  m["config"] = sim.truth.to_json();
  m["config"].erase("params");
  m["config"].erase("generating_params");
  m["config"].erase("cell_means");
  m["config"].erase("cell_counts");
  m["seed"] = spec.seed;
  m["inputs"] = nlohmann::json::array();
  m["outputs"] = {file_entry(wells_file), file_entry(truth_file)};
  write_json(m, cfg.output_dir / "simulate_manifest.json");

  log << "simulated " << sim.wells.size() << " wells (kind " << to_string(spec.kind) << ", B="
      << spec.blocks << ", T=" << spec.times << ", seed " << spec.seed << ")\n";
  log << "wrote " << wells_file.string() << " and " << truth_file.string() << '\n';
  return kSuccess;
}

int cmd_fit(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const fs::path dataset_file = cfg.dataset_path();
  require_file(dataset_file, "dataset");
  const data::PreparedDataset d = data::read_dataset(dataset_file);
  const sampler::FitResult res = sampler::fit(cfg.kind, d, cfg.prior, cfg.sampler);

  fs::create_directories(cfg.output_dir);
  const fs::path draws_file = cfg.output_dir / "draws.csv";
  sampler::write_draws_csv(res.draws, res.names, draws_file);

  nlohmann::json summary = nlohmann::json::array();
  double min_ess = sampler::kUndefined;
  for (const auto& s : res.summary) {
    summary.push_back({{"name", s.name},
                       {"mean", s.mean},
                       {"sd", s.sd},
                       {"q05", s.q05},
                       {"q95", s.q95},
                       {"rhat", number_or_null(s.rhat)},
                       {"ess_bulk", number_or_null(s.ess_bulk)}});
    if (!sampler::is_undefined(s.ess_bulk) &&
        (sampler::is_undefined(min_ess) || s.ess_bulk < min_ess)) {
      min_ess = s.ess_bulk;
    }
  }
  nlohmann::json chains = nlohmann::json::array();
  for (const auto& c : res.draws.stats) {
    chains.push_back({{"divergences", c.divergences},
                      {"step_size", c.step_size},
                      {"mean_accept_stat", c.mean_accept_stat},
                      {"leapfrog_steps", c.leapfrog_steps},
                      {"tree_depth_histogram", c.tree_depth_histogram}});
  }
  const bool undefined = sampler::is_undefined(res.max_rhat());
  nlohmann::json m = manifest("fit", cfg, {dataset_file}, {draws_file});
  m["diagnostics"] = {{"max_rhat", number_or_null(res.max_rhat())},
                      {"min_ess_bulk", number_or_null(min_ess)},
                      {"divergences", res.divergences()},
                      {"rhat_threshold", sampler::kRhatThreshold},
                      {"rhat_flagged", res.rhat_flagged()},
                      {"divergence_flagged", res.divergence_flagged()},
                      {"diagnostics_defined", !undefined},
                      {"chains", chains}};
  m["summary"] = summary;
  write_json(m, cfg.output_dir / "fit_manifest.json");

  log << "kind " << to_string(cfg.kind) << ": " << res.draws.chains << " chains x "
      << res.draws.draws_per_chain << " draws, " << res.names.size() << " parameters, "
      << res.draws.wall_time_seconds << " s\n";
  log << "max R-hat " << res.max_rhat() << ", min bulk ESS " << min_ess << ", divergences "
      << res.divergences() << '\n';
  log << "wrote " << draws_file.string() << '\n';

  const bool ok = res.converged() && !undefined;
  if (!ok) {
    std::string why;
    if (res.rhat_flagged()) why += " R-hat above " + csv::format_double(sampler::kRhatThreshold) + ";";
    if (res.divergence_flagged()) why += " " + std::to_string(res.divergences()) + " divergences;";
    if (undefined) why += " R-hat undefined (need >= 2 chains of >= 4 draws);";
    log << (cfg.strict ? "diagnostics failed:" : "warning: diagnostics failed:") << why << '\n';
    if (cfg.strict) return kDiagnosticsFailure;
  }
  return kSuccess;
}

int cmd_report(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const fs::path dataset_file = cfg.dataset_path();
  const fs::path draws_file = cfg.draws_path();
  require_file(dataset_file, "dataset");
  require_file(draws_file, "draws file");
  const data::PreparedDataset d = data::read_dataset(dataset_file);
  if (d.kind != cfg.kind) {
    throw DimensionError("dataset was prepared for kind " + to_string(d.kind) +
                         ", report requested kind " + to_string(cfg.kind));
  }
  const sampler::DrawsFile draws = sampler::read_draws_csv(draws_file);
  const model::ParamLayout layout(d.kind, d.blocks(), d.times());
  if (draws.names != layout.names()) {
    throw DimensionError("draws columns do not match the kind " + to_string(d.kind) +
                         " layout for this dataset");
  }

  const std::vector<double> raw =
      report::posterior_mean_predictions(draws.draws, d.kind, d, false);
  const std::vector<double> pred =
      cfg.clamp_negative ? report::posterior_mean_predictions(draws.draws, d.kind, d, true) : raw;
  const std::vector<double>& obs = d.y_original;
  const auto negatives = std::count_if(raw.begin(), raw.end(), [](double v) { return v < 0.0; });

  fs::create_directories(cfg.output_dir);
  std::vector<fs::path> outputs;
  auto emit = [&](const std::string& name, const std::string& text) {
    const fs::path p = cfg.output_dir / name;
    write_text(text, p);
    outputs.push_back(p);
  };

  const report::EstimateTable est = report::estimate_table(pred, d);
  const report::EstimateTable observed = report::observed_table(d);
  emit("estimate_table.csv", est.to_csv(cfg.table_decimals));
  emit("observed_table.csv", observed.to_csv(cfg.table_decimals));
  emit("histogram.csv", report::histogram_csv(report::histogram_data(pred, obs, cfg.histogram_bins)));
  if (has_time_effects(d.kind)) {
    emit("trajectories.csv", report::trajectories_csv(report::time_trajectories(
                                 draws.draws, d.kind, d.blocks(), d.time_labels)));
  }
  if (!cfg.aggregations.empty()) {
    std::ostringstream agg;
    agg << "table,blocks";
    for (const auto& t : d.time_labels) agg << ',' << t;
    agg << '\n';
    for (const auto& set : cfg.aggregations) {
      for (const report::EstimateTable* table : {&est, &observed}) {
        const auto values = report::aggregate_blocks(*table, set, cfg.aggregation_weighting);
        agg << (table == &est ? "model_based" : "observed_average") << ',' << join_blocks(set);
        for (const auto& v : values) agg << ',' << (v ? csv::format_double(*v) : "NA");
        agg << '\n';
      }
    }
    emit("aggregation.csv", agg.str());
  }

  const double r = report::rmsd(pred, obs);
  const report::Interval iv = report::discrepancy_interval(pred, obs);
  const auto summaries = sampler::summarize(draws.draws, draws.names);
  double max_rhat = sampler::kUndefined;
  double min_ess = sampler::kUndefined;
  for (const auto& s : summaries) {
    if (!sampler::is_undefined(s.rhat) && (sampler::is_undefined(max_rhat) || s.rhat > max_rhat)) {
      max_rhat = s.rhat;
    }
    if (!sampler::is_undefined(s.ess_bulk) &&
        (sampler::is_undefined(min_ess) || s.ess_bulk < min_ess)) {
      min_ess = s.ess_bulk;
    }
  }
  const nlohmann::json summary = {
      {"kind", to_string(d.kind)},
      {"N", d.size()},
      {"B", d.blocks()},
      {"T", d.times()},
      {"rmsd", r},
      {"clamp_negative", cfg.clamp_negative},
      {"negative_predictions", negatives},
      {"discrepancy_interval", {{"lo", 0.05}, {"hi", 0.95}, {"low", iv.low}, {"high", iv.high}}},
      {"diagnostics",
       {{"chains", draws.draws.chains},
        {"draws_per_chain", draws.draws.draws_per_chain},
        {"max_rhat", number_or_null(max_rhat)},
        {"min_ess_bulk", number_or_null(min_ess)}}}};
  emit("summary.json", summary.dump(2) + "\n");
  write_json(manifest("report", cfg, {dataset_file, draws_file}, outputs),
             cfg.output_dir / "report_manifest.json");

  log << "RMSD " << r << " (90% of discrepancies in [" << iv.low << ", " << iv.high << "]), "
      << negatives << " negative estimates" << (cfg.clamp_negative ? " clamped to 0" : "") << '\n';
  log << "wrote " << outputs.size() << " report files to " << cfg.output_dir.string() << '\n';
  return kSuccess;
}

std::vector<std::string> config_file_arguments(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("config file '" + path.string() + "' does not exist");
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  std::vector<std::string> args;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw RowError("config: expected key=value", line_no);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    while (!key.empty() && key.front() == '-') key.erase(0, 1);
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw RowError("config: empty key", line_no);
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

}  // namespace wellcap::cli

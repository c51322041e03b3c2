#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wellcap/cli/simulate.hpp"
#include "wellcap/dataset.hpp"
#include "wellcap/model.hpp"
#include "wellcap/nuts.hpp"
#include "wellcap/report.hpp"

namespace wellcap::cli {

enum ExitCode : int { kSuccess = 0, kDiagnosticsFailure = 1, kUsageError = 2 };

/// Everything a command needs. Paths left empty resolve inside `output_dir`
/// (dataset.json, draws.csv).
struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path dataset;
  std::filesystem::path draws;
  std::filesystem::path output_dir = ".";
  ModelKind kind = ModelKind::spatio_temporal;
  data::PipelinePolicy policy = data::PipelinePolicy::defaults_for(ModelKind::spatio_temporal);
  model::PriorConfig prior = model::PriorConfig::defaults_for(ModelKind::spatio_temporal);
  sampler::SamplerConfig sampler;
  bool strict = true;
  bool clamp_negative = false;
  std::vector<std::vector<std::string>> aggregations;
  report::Weighting aggregation_weighting = report::Weighting::equal;
  int histogram_bins = 30;
  int table_decimals = 2;

  std::filesystem::path dataset_path() const;
  std::filesystem::path draws_path() const;
  /// Kind/policy compatibility (kind C needs logged data) and value ranges.
  void validate() const;
  nlohmann::json to_json() const;
};

/// Filter, impute, transform and standardize the input wells; writes
/// dataset.json, preprocess_report.json and preprocess_manifest.json.
int cmd_preprocess(const RunConfig& cfg, std::ostream& log);

/// Writes wells.csv, truth.json and simulate_manifest.json.
int cmd_simulate(const SimulationSpec& spec, const RunConfig& cfg, std::ostream& log);

/// Samples the posterior; writes draws.csv and fit_manifest.json. Returns
/// kDiagnosticsFailure when `strict` and the run has divergences, an R-hat
/// above the threshold, or no defined R-hat at all.
int cmd_fit(const RunConfig& cfg, std::ostream& log);

/// Writes the report bundle: estimate_table.csv, observed_table.csv,
/// histogram.csv, trajectories.csv (kinds B/C), aggregation.csv (when
/// requested), summary.json and report_manifest.json.
int cmd_report(const RunConfig& cfg, std::ostream& log);

/// Full command line (without the program name). Errors are printed to `err`
/// and mapped to exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// key=value lines ('#' comments, blank lines and [section] headers ignored)
/// turned into "--key=value" arguments.
std::vector<std::string> config_file_arguments(const std::filesystem::path& path);

}  // namespace wellcap::cli

#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wellcap/grid.hpp"
#include "wellcap/kind.hpp"

namespace wellcap::data {

enum class WellType { horizontal, vertical, other };

/// One well observation. Quantities: oil in barrels, water in gallons, sand
/// in pounds, lateral length in feet (or their logs after log_transform).
struct WellRecord {
  std::string well_id;
  std::chrono::year_month_day date;
  grid::Locator6 locator;
  double oil = 0.0;
  double water = 0.0;
  double sand = 0.0;
  double lateral = 0.0;
  WellType well_type = WellType::horizontal;
};

enum class TimeGranularity { year, year_month };
enum class ImputationGrouping { prefix4, full6 };

struct PipelinePolicy {
  TimeGranularity time_granularity = TimeGranularity::year;
  int scale_k = 2;
  bool log_transform = false;
  bool impute_zeros = false;
  ImputationGrouping imputation_grouping = ImputationGrouping::prefix4;

  /// A: k=1, raw scale. B: k=2, raw scale. C: k=2, prefix4 imputation + logs.
  static PipelinePolicy defaults_for(ModelKind kind);
};

/// Columns, in order:
/// well_id,date,lat,lon,locator,oil_bbl,water_gal,sand_lb,lateral_ft,well_type
inline constexpr std::array<const char*, 10> kWellColumns = {
    "well_id", "date",    "lat",       "lon",        "locator",
    "oil_bbl", "water_gal", "sand_lb", "lateral_ft", "well_type"};

std::vector<WellRecord> read_wells(const std::filesystem::path& path);
std::vector<WellRecord> read_wells(std::istream& in);

/// Writes the same layout, with the locator column populated and lat/lon empty.
void write_wells(const std::vector<WellRecord>& records, std::ostream& out);
void write_wells(const std::vector<WellRecord>& records, const std::filesystem::path& path);

std::string to_string(WellType t);

struct RejectionCounts {
  std::size_t not_horizontal = 0;
  std::size_t negative_oil = 0;
  std::size_t negative_water = 0;
  std::size_t negative_sand = 0;
  std::size_t nonpositive_lateral = 0;

  std::size_t total() const {
    return not_horizontal + negative_oil + negative_water + negative_sand +
           nonpositive_lateral;
  }
};

struct FilterResult {
  std::vector<WellRecord> kept;
  RejectionCounts rejected;  // each record counted once, under its first failed rule
};

/// Keeps horizontal wells with oil, water, sand >= 0 and lateral > 0.
FilterResult filter_wells(std::vector<WellRecord> records);

enum class Variable { oil = 0, water = 1, sand = 2, lateral = 3 };
inline constexpr std::array<Variable, 4> kAllVariables = {
    Variable::oil, Variable::water, Variable::sand, Variable::lateral};
std::string to_string(Variable v);
double& value_of(WellRecord& r, Variable v);
double value_of(const WellRecord& r, Variable v);

struct ImputationResult {
  std::vector<WellRecord> records;
  std::array<std::size_t, 4> imputed{};  // indexed by Variable
};

/// Replaces each zero by the mean of the strictly positive values of the same
/// variable in the record's block (4- or 6-character grouping), falling back
/// to the global positive mean. Throws PipelineError when a variable has no
/// positive value at all.
ImputationResult impute_zeros(std::vector<WellRecord> records,
                              ImputationGrouping grouping);

/// Natural log of oil, water, sand and lateral. Throws PipelineError on any
/// non-positive value.
std::vector<WellRecord> log_transform(std::vector<WellRecord> records);

struct Intensities {
  double e = 0.0;   // (W + S) / L
  double ew = 0.0;  // W / L
  double es = 0.0;  // S / L
};

/// Ratios on the working scale. A working L of exactly zero (raw lateral 1
/// under logs) yields all-zero intensities.
Intensities intensities(double water, double sand, double lateral);
Intensities intensities(const WellRecord& r);

struct Standardizer {
  double mean = 0.0;
  double sd = 1.0;  // sample sd, n-1 denominator
  int k = 1;

  double apply(double x) const { return (x - mean) / (k * sd); }
  double invert(double z) const { return mean + z * k * sd; }
};

struct Standardized {
  std::vector<double> z;
  Standardizer standardizer;
};

/// z = (x - mean) / (k * sd). Needs at least two values and sd > 0.
Standardized standardize(std::span<const double> values, int k);

/// Per-group means; groups without members are nullopt.
std::vector<std::optional<double>> group_averages(std::span<const double> values,
                                                  std::span<const int> index,
                                                  int group_count);

/// Model-ready data. Group indices are 0-based. Vectors a model kind does not
/// use are left empty.
struct PreparedDataset {
  ModelKind kind = ModelKind::spatial;
  PipelinePolicy policy;

  std::vector<std::string> well_ids;
  std::vector<double> y;   // standardized outcome
  std::vector<double> l;   // standardized lateral
  std::vector<double> e;   // standardized combined intensity (B)
  std::vector<double> ew;  // standardized water intensity (C)
  std::vector<double> es;  // standardized sand intensity (C)
  std::vector<double> w;   // standardized water (A)
  std::vector<double> y_original;  // outcome on the original (unlogged) scale

  std::vector<int> block_of;
  std::vector<int> time_of;
  std::vector<std::size_t> n_per_block;
  std::vector<std::size_t> n_per_time;

  std::vector<double> w_bar_b;
  std::vector<double> e_bar_b;
  std::vector<double> ew_bar_b;
  std::vector<double> es_bar_b;
  std::vector<double> ew_bar_t;
  std::vector<double> es_bar_t;

  std::map<std::string, Standardizer> standardizers;
  std::vector<grid::Locator6> block_codes;
  std::vector<std::string> time_labels;

  std::size_t size() const { return y.size(); }
  int blocks() const { return static_cast<int>(block_codes.size()); }
  int times() const { return static_cast<int>(time_labels.size()); }

  /// Standardized outcome value back to barrels (exponentiated when logged).
  double to_original_outcome(double z) const;
};

/// Label of the period containing `date`: "2015" or "2015-03".
std::string time_label(const std::chrono::year_month_day& date,
                       TimeGranularity granularity);

/// Builds indices, standardized vectors and group averages. Input must already
/// be filtered (and for kind C imputed and logged). Block indices follow
/// locator order, time indices chronological order; record order is
/// irrelevant.
PreparedDataset build_design(std::vector<WellRecord> records,
                             const PipelinePolicy& policy, ModelKind kind);

struct PipelineResult {
  PreparedDataset dataset;
  std::size_t input_count = 0;
  RejectionCounts rejected;
  std::array<std::size_t, 4> imputed{};
};

/// filter -> (impute) -> (log) -> build_design.
PipelineResult run_pipeline(std::vector<WellRecord> records,
                            const PipelinePolicy& policy, ModelKind kind);

nlohmann::json to_json(const PreparedDataset& data);
PreparedDataset dataset_from_json(const nlohmann::json& j);

void write_dataset(const PreparedDataset& data, const std::filesystem::path& path);
PreparedDataset read_dataset(const std::filesystem::path& path);

}  // namespace wellcap::data

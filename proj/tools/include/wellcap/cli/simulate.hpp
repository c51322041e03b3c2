#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wellcap/dataset.hpp"
#include "wellcap/kind.hpp"
#include "wellcap/model.hpp"

namespace wellcap::cli {

/// Synthetic data settings. Covariates are log-normal; `*_log_mean` and
/// `*_log_sd` are the mean and sd of the natural log.
struct SimulationSpec {
  ModelKind kind = ModelKind::spatio_temporal;
  int blocks = 20;
  int times = 6;
  std::size_t wells = 1000;
  std::uint64_t seed = 1;
  int first_year = 2015;

  /// Dirichlet concentration for spreading wells over the B x T cells; small
  /// values leave many cells sparse.
  double cell_concentration = 1.0;

  double lateral_log_mean = 9.2;  // about 10,000 ft
  double lateral_log_sd = 0.3;
  double water_log_mean = 16.5;  // about 15M gal
  double water_log_sd = 0.5;
  double sand_log_mean = 16.1;  // about 10M lb
  double sand_log_sd = 0.5;

  /// Fraction of water and sand values replaced by zero.
  double zero_fraction = 0.0;

  /// Parameters on the generating scale (layout order). Drawn from the prior
  /// when absent.
  std::optional<std::vector<double>> fixed_params;
  model::PriorConfig prior = model::PriorConfig::defaults_for(ModelKind::spatio_temporal);

  void validate() const;
};

/// Ground truth for a simulated data set.
///
/// `params` is expressed on the scale the fitted model sees (outcome
/// standardized by the pipeline), with the alpha/tau level shift fixed at its
/// prior mode. `cell_means` are the mean true predictive means per (b, t) on
/// the original outcome scale.
struct SyntheticTruth {
  SimulationSpec spec;
  std::vector<std::string> names;
  std::vector<double> params;
  std::vector<double> generating_params;
  std::vector<std::string> block_codes;
  std::vector<std::string> time_labels;
  std::vector<std::size_t> cell_counts;               // B x T row-major
  std::vector<std::optional<double>> cell_means;      // B x T row-major
  double outcome_center = 0.0;  // oil = center + scale * z (exp of it for logged kinds)
  double outcome_scale = 1.0;

  double sigma_y() const;
  nlohmann::json to_json() const;
};

struct SimulationOutput {
  std::vector<data::WellRecord> wells;
  SyntheticTruth truth;
};

/// Deterministic for a given spec.
SimulationOutput simulate(const SimulationSpec& spec);

}  // namespace wellcap::cli

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wellcap/dataset.hpp"
#include "wellcap/diagnostics.hpp"
#include "wellcap/model.hpp"
#include "wellcap/nuts.hpp"

namespace wellcap::sampler {

/// Rows above this split R-hat are flagged as not converged.
inline constexpr double kRhatThreshold = 1.1;

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
  double rhat = 0.0;      // NaN when undefined
  double ess_bulk = 0.0;  // NaN when undefined
};

struct FitResult {
  ModelKind kind = ModelKind::spatial;
  std::vector<std::string> names;
  PosteriorDraws draws;
  std::vector<ParameterSummary> summary;

  std::size_t divergences() const { return draws.total_divergences(); }
  /// Largest defined R-hat (NaN if none is defined).
  double max_rhat() const;
  bool rhat_flagged() const;
  bool divergence_flagged() const { return divergences() > 0; }
  bool converged() const { return !rhat_flagged() && !divergence_flagged(); }
};

/// Per-parameter mean, sd, 5%/95% quantiles, split R-hat and bulk ESS.
/// Diagnostics need >= 2 chains of >= 4 draws; otherwise they are NaN.
std::vector<ParameterSummary> summarize(const PosteriorDraws& draws,
                                        const std::vector<std::string>& names);

FitResult fit(const model::Model& model, const SamplerConfig& config);

FitResult fit(ModelKind kind, const data::PreparedDataset& data,
              const model::PriorConfig& prior, const SamplerConfig& config);

/// Columns: chain,draw,<layout names...>; chain and draw are 1-based.
void write_draws_csv(const PosteriorDraws& draws, const std::vector<std::string>& names,
                     const std::filesystem::path& path);

struct DrawsFile {
  std::vector<std::string> names;
  PosteriorDraws draws;  // sampler statistics are not stored in the CSV
};
DrawsFile read_draws_csv(const std::filesystem::path& path);

}  // namespace wellcap::sampler

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wellcap/dataset.hpp"
#include "wellcap/kind.hpp"
#include "wellcap/nuts.hpp"

namespace wellcap::report {

/// sqrt(mean((pred - obs)^2)).
double rmsd(std::span<const double> pred, std::span<const double> obs);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Empirical quantiles of obs - pred (linear interpolation between order
/// statistics, see stats::quantile).
Interval discrepancy_interval(std::span<const double> pred, std::span<const double> obs,
                              double lo = 0.05, double hi = 0.95);

/// Posterior mean of each well's predictive mean, mapped to barrels. For a
/// logged outcome the mean is taken on the log scale and then exponentiated.
/// With `clamp_negative`, negative estimates become 0.
std::vector<double> posterior_mean_predictions(const sampler::PosteriorDraws& draws,
                                               ModelKind kind,
                                               const data::PreparedDataset& data,
                                               bool clamp_negative = false);

struct Histogram {
  std::vector<double> edges;  // bins + 1 shared edges
  std::vector<std::size_t> predicted;
  std::vector<std::size_t> observed;
};

/// Equal-width bins over the combined range of both series. The last bin is
/// closed on the right.
Histogram histogram_data(std::span<const double> pred, std::span<const double> obs,
                         int bin_count);
std::string histogram_csv(const Histogram& h);

enum class Provenance { model_based, observed_average };

/// Block x time matrix; a cell is empty exactly when no well falls in it.
struct EstimateTable {
  std::vector<std::string> block_codes;
  std::vector<std::string> time_labels;
  std::vector<std::optional<double>> values;  // row-major, blocks x times
  std::vector<std::size_t> counts;            // wells per cell, same layout
  Provenance provenance = Provenance::model_based;

  std::size_t rows() const { return block_codes.size(); }
  std::size_t cols() const { return time_labels.size(); }
  const std::optional<double>& at(std::size_t b, std::size_t t) const {
    return values[b * cols() + t];
  }
  std::size_t count(std::size_t b, std::size_t t) const { return counts[b * cols() + t]; }
  std::size_t row_of(std::string_view code) const;

  /// Rows whose code starts with `prefix`, in the original order.
  EstimateTable rows_with_prefix(std::string_view prefix) const;
  /// Missing cells print as NA. `decimals < 0` prints shortest round-trip values.
  std::string to_csv(int decimals = -1) const;
};

/// Parses the layout written by EstimateTable::to_csv (counts are unknown and
/// set to 1 for present cells).
EstimateTable table_from_csv(std::istream& in, Provenance provenance);

/// Cell means of `predictions` (aligned with dataset rows).
EstimateTable estimate_table(std::span<const double> predictions,
                             const data::PreparedDataset& data);

/// Cell means of the observed outcome on the original scale.
EstimateTable observed_table(const data::PreparedDataset& data);

enum class Weighting { equal, well_counts };

/// Per time: sum(mu(b,t) w_b) / sum(w_b) over the requested blocks; nullopt
/// for times where any requested cell is missing.
std::vector<std::optional<double>> aggregate_blocks(const EstimateTable& table,
                                                    const std::vector<std::string>& blocks,
                                                    const std::vector<double>& weights);
std::vector<std::optional<double>> aggregate_blocks(const EstimateTable& table,
                                                    const std::vector<std::string>& blocks,
                                                    Weighting weighting = Weighting::equal);

struct TrajectorySeries {
  std::string parameter;  // tau, gamma_t, phi, omega
  std::vector<std::string> time_labels;
  std::vector<double> mean;
  std::vector<double> q05;
  std::vector<double> q95;
};

/// Posterior mean and 5%/95% band per period for each time-indexed family.
/// Kind A has none and throws DomainError.
std::vector<TrajectorySeries> time_trajectories(const sampler::PosteriorDraws& draws,
                                                ModelKind kind, int blocks,
                                                const std::vector<std::string>& time_labels);
std::string trajectories_csv(const std::vector<TrajectorySeries>& series);

}  // namespace wellcap::report

#pragma once

#include <cmath>
#include <limits>
#include <vector>

namespace wellcap::sampler {

/// Returned when a diagnostic is undefined (e.g. constant draws).
inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();
inline bool is_undefined(double v) { return std::isnan(v); }

/// Draws of one scalar parameter, one inner vector per chain.
using ChainDraws = std::vector<std::vector<double>>;

/// Rank-normalized split R-hat: the larger of the bulk value and the value on
/// draws folded around the median. Needs >= 2 chains of >= 4 draws each.
double split_rhat(const ChainDraws& chains);

/// Split R-hat on rank-normalized draws only.
double rhat_bulk(const ChainDraws& chains);

/// Split R-hat on rank-normalized |x - median|.
double rhat_tail(const ChainDraws& chains);

/// Bulk effective sample size: rank-normalized split chains, autocorrelations
/// summed with Geyer's initial positive/monotone pairing.
double ess_bulk(const ChainDraws& chains);

/// Same estimator on the raw (not rank-normalized) split chains; used for the
/// Monte Carlo standard error of the mean.
double ess_basic(const ChainDraws& chains);

/// sd / sqrt(ess_basic).
double mcse_mean(const ChainDraws& chains);

}  // namespace wellcap::sampler

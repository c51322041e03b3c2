#pragma once

#include <span>
#include <vector>

namespace wellcap::stats {

double mean(std::span<const double> x);

/// n-1 denominator; 0 for fewer than two values.
double sample_variance(std::span<const double> x);

/// Linear interpolation between order statistics: h = (n-1)p,
/// q = x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).
/// `x` need not be sorted. Requires a non-empty input and 0 <= p <= 1.
double quantile(std::span<const double> x, double p);
double quantile_sorted(std::span<const double> sorted, double p);

/// Standard normal quantile function.
double normal_quantile(double p);

/// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> x);

}  // namespace wellcap::stats

#include "wellcap/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "wellcap/errors.hpp"
#include "wellcap/stats.hpp"

namespace wellcap::sampler {

namespace {

void check_shape(const ChainDraws& chains, std::size_t min_chains, std::size_t min_draws) {
  if (chains.size() < min_chains) {
    throw DimensionError("diagnostic needs at least " + std::to_string(min_chains) +
                         " chains");
  }
  const std::size_t n = chains.front().size();
  for (const auto& c : chains) {
    if (c.size() != n) throw DimensionError("chains must have equal length");
  }
  if (n < min_draws) {
    throw DimensionError("diagnostic needs at least " + std::to_string(min_draws) +
                         " draws per chain");
  }
}

// Halves each chain; an odd middle draw is dropped.
ChainDraws split(const ChainDraws& chains) {
  ChainDraws out;
  out.reserve(chains.size() * 2);
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    out.emplace_back(c.begin(), c.begin() + half);
    out.emplace_back(c.end() - half, c.end());
  }
  return out;
}

bool is_constant(const ChainDraws& chains) {
  const double first = chains.front().front();
  for (const auto& c : chains) {
    for (double v : c) {
      if (v != first) return false;
    }
  }
  return true;
}

// Normal scores of pooled ranks: Phi^-1((r - 3/8) / (S + 1/4)).
ChainDraws rank_normalize(const ChainDraws& chains) {
  std::vector<double> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  const std::vector<double> ranks = stats::average_ranks(pooled);
  const double s = static_cast<double>(pooled.size());
  ChainDraws out;
  std::size_t k = 0;
  for (const auto& c : chains) {
    std::vector<double> z(c.size());
    for (double& v : z) v = stats::normal_quantile((ranks[k++] - 0.375) / (s + 0.25));
    out.push_back(std::move(z));
  }
  return out;
}

ChainDraws fold(const ChainDraws& chains) {
  std::vector<double> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  const double median = stats::quantile(pooled, 0.5);
  ChainDraws out = chains;
  for (auto& c : out) {
    for (double& v : c) v = std::abs(v - median);
  }
  return out;
}

// Classic potential scale reduction on already-split chains.
double basic_rhat(const ChainDraws& chains) {
  const double n = static_cast<double>(chains.front().size());
  std::vector<double> means, vars;
  for (const auto& c : chains) {
    means.push_back(stats::mean(c));
    vars.push_back(stats::sample_variance(c));
  }
  const double between = n * stats::sample_variance(means);
  const double within = stats::mean(vars);
  if (!(within > 0.0)) return kUndefined;
  const double var_plus = (n - 1.0) / n * within + between / n;
  return std::sqrt(var_plus / within);
}

// Biased autocovariance at a single lag.
double autocovariance(const std::vector<double>& x, double mean, std::size_t lag) {
  const std::size_t n = x.size();
  double s = 0.0;
  for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - mean) * (x[i + lag] - mean);
  return s / static_cast<double>(n);
}

// Multi-chain ESS with Geyer's initial positive sequence and monotone
// correction. Autocovariances are computed lazily, lag by lag, since the
// positive sequence usually truncates early.
double basic_ess(const ChainDraws& chains) {
  const std::size_t m = chains.size();
  const std::size_t n = chains.front().size();
  std::vector<double> means(m), vars(m);
  for (std::size_t c = 0; c < m; ++c) {
    means[c] = stats::mean(chains[c]);
    vars[c] = autocovariance(chains[c], means[c], 0) * n / (n - 1.0);
  }
  const double mean_var = stats::mean(vars);
  double var_plus = mean_var * (n - 1.0) / n;
  if (m > 1) var_plus += stats::sample_variance(means);
  if (!(var_plus > 0.0)) return kUndefined;

  auto rho = [&](std::size_t lag) {
    double acov = 0.0;
    for (std::size_t c = 0; c < m; ++c) acov += autocovariance(chains[c], means[c], lag);
    acov /= static_cast<double>(m);
    return 1.0 - (mean_var - acov) / var_plus;
  };

  std::vector<double> rho_hat(n + 2, 0.0);
  rho_hat[0] = 1.0;
  double rho_even = 1.0;
  double rho_odd = n > 1 ? rho(1) : 0.0;
  rho_hat[1] = rho_odd;
  std::size_t t = 1;
  while (t + 5 < n && rho_even + rho_odd > 0.0) {
    rho_even = rho(t + 1);
    rho_odd = rho(t + 2);
    if (rho_even + rho_odd >= 0.0) {
      rho_hat[t + 1] = rho_even;
      rho_hat[t + 2] = rho_odd;
    }
    t += 2;
  }
  const std::size_t max_t = t;
  if (rho_even > 0.0) rho_hat[max_t + 1] = rho_even;

  for (std::size_t u = 1; u + 2 <= max_t; u += 2) {
    if (rho_hat[u + 1] + rho_hat[u + 2] > rho_hat[u - 1] + rho_hat[u]) {
      rho_hat[u + 1] = 0.5 * (rho_hat[u - 1] + rho_hat[u]);
      rho_hat[u + 2] = rho_hat[u + 1];
    }
  }

  const double total = static_cast<double>(m * n);
  double tau = -1.0;
  for (std::size_t u = 0; u <= max_t; ++u) tau += 2.0 * rho_hat[u];
  tau += rho_hat[max_t + 1];
  tau = std::max(tau, 1.0 / std::log10(total));
  return total / tau;
}

}  // namespace

double rhat_bulk(const ChainDraws& chains) {
  check_shape(chains, 2, 4);
  if (is_constant(chains)) return kUndefined;
  return basic_rhat(rank_normalize(split(chains)));
}

double rhat_tail(const ChainDraws& chains) {
  check_shape(chains, 2, 4);
  if (is_constant(chains)) return kUndefined;
  const ChainDraws folded = fold(chains);
  if (is_constant(folded)) return kUndefined;
  return basic_rhat(rank_normalize(split(folded)));
}

double split_rhat(const ChainDraws& chains) {
  const double bulk = rhat_bulk(chains);
  if (is_undefined(bulk)) return kUndefined;
  const double tail = rhat_tail(chains);
  if (is_undefined(tail)) return bulk;
  return std::max(bulk, tail);
}

double ess_bulk(const ChainDraws& chains) {
  check_shape(chains, 1, 4);
  if (is_constant(chains)) return kUndefined;
  return basic_ess(rank_normalize(split(chains)));
}

double ess_basic(const ChainDraws& chains) {
  check_shape(chains, 1, 4);
  if (is_constant(chains)) return kUndefined;
  return basic_ess(split(chains));
}

double mcse_mean(const ChainDraws& chains) {
  const double ess = ess_basic(chains);
  if (is_undefined(ess)) return kUndefined;
  std::vector<double> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  return std::sqrt(stats::sample_variance(pooled) / ess);
}

}  // namespace wellcap::sampler

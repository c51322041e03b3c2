#pragma once

// Independent reference implementations used only by tests. They follow the
// textbook formulas directly, in extended precision where that matters, and
// share no code with the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "wellcap/kind.hpp"
#include "wellcap/model.hpp"

namespace oracle {

using ld = long double;

// Maidenhead by successive subdivision of the degree offsets.
inline std::string locator(long double lat, long double lon) {
  ld x = lon + 180.0L;
  ld y = lat + 90.0L;
  const int fx = static_cast<int>(std::floor(x / 20.0L));
  const int fy = static_cast<int>(std::floor(y / 10.0L));
  x -= fx * 20.0L;
  y -= fy * 10.0L;
  const int sx = static_cast<int>(std::floor(x / 2.0L));
  const int sy = static_cast<int>(std::floor(y / 1.0L));
  x -= sx * 2.0L;
  y -= sy * 1.0L;
  const int ux = static_cast<int>(std::floor(x * 60.0L / 5.0L));
  const int uy = static_cast<int>(std::floor(y * 60.0L / 2.5L));
  std::string s;
  s += static_cast<char>('A' + fx);
  s += static_cast<char>('A' + fy);
  s += static_cast<char>('0' + sx);
  s += static_cast<char>('0' + sy);
  s += static_cast<char>('a' + ux);
  s += static_cast<char>('a' + uy);
  return s;
}

struct Center {
  ld lat;
  ld lon;
};

inline Center center(const std::string& c) {
  const ld lon = -180.0L + (c[0] - 'A') * 20.0L + (c[2] - '0') * 2.0L +
                 (c[4] - 'a') * (5.0L / 60.0L) + 2.5L / 60.0L;
  const ld lat = -90.0L + (c[1] - 'A') * 10.0L + (c[3] - '0') * 1.0L +
                 (c[5] - 'a') * (2.5L / 60.0L) + 1.25L / 60.0L;
  return {lat, lon};
}

inline ld mean(const std::vector<double>& x) {
  ld s = 0;
  for (double v : x) s += v;
  return s / x.size();
}

// Two-pass sample sd.
inline ld sample_sd(const std::vector<double>& x) {
  const ld m = mean(x);
  ld ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / (x.size() - 1));
}

// Hyndman-Fan type 7.
inline double quantile7(std::vector<double> x, double p) {
  std::sort(x.begin(), x.end());
  const ld h = (x.size() - 1) * static_cast<ld>(p);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return static_cast<double>(x[lo] + (h - lo) * (static_cast<ld>(x[hi]) - x[lo]));
}

inline ld normal_lpdf(ld x, ld mu, ld sd) {
  const ld z = (x - mu) / sd;
  return -0.5L * std::log(2.0L * 3.14159265358979323846264338327950288L) - std::log(sd) -
         0.5L * z * z;
}

// log density of normal+(loc, scale) at sigma = exp(u), plus the Jacobian u.
inline ld positive_lpdf_log(ld u, ld loc, ld scale) {
  const ld sigma = std::exp(u);
  const ld mass = 0.5L * std::erfc(-loc / (scale * std::sqrt(2.0L)));
  return normal_lpdf(sigma, loc, scale) - std::log(mass) + u;
}

// Dense copy of a model's data, so the oracle does not read through spans
// the library built.
struct Data {
  std::vector<double> y, l;
  std::vector<int> b, t;
  int B = 0, T = 1;
  std::vector<double> w_bar_b, e_bar_b, ew_bar_b, es_bar_b, ew_bar_t, es_bar_t;
};

inline Data copy(const wellcap::model::ModelData& d) {
  auto v = [](auto s) { return std::vector<std::remove_cv_t<typename decltype(s)::element_type>>(s.begin(), s.end()); };
  Data o;
  o.y = v(d.y);
  o.l = v(d.l);
  o.b = v(d.block_of);
  o.t = v(d.time_of);
  o.B = d.blocks;
  o.T = d.times;
  o.w_bar_b = v(d.w_bar_b);
  o.e_bar_b = v(d.e_bar_b);
  o.ew_bar_b = v(d.ew_bar_b);
  o.es_bar_b = v(d.es_bar_b);
  o.ew_bar_t = v(d.ew_bar_t);
  o.es_bar_t = v(d.es_bar_t);
  return o;
}

// Log posterior written out term by term from the model equations. The
// parameter order is the documented flat layout.
template <class P>
ld log_posterior(wellcap::ModelKind kind, const P& p, const Data& d,
                 const wellcap::model::PriorConfig& pr, bool likelihood = true,
                 bool prior = true) {
  using wellcap::ModelKind;
  const int B = d.B, T = d.T;
  ld lp = 0;
  auto at = [&](int i) { return static_cast<ld>(p[i]); };
  auto walk = [&](int off) {
    ld s = 0;
    for (int t = 0; t < T; ++t) s += normal_lpdf(at(off + t), t == 0 ? 0.0L : at(off + t - 1), pr.scale_walk);
    return s;
  };
  if (kind == ModelKind::spatial) {
    const int alpha = 0, beta = B, gamma = 2 * B, delta = 2 * B + 1, lsy = 2 * B + 2,
              lsb = 2 * B + 3;
    const ld sy = std::exp(at(lsy));
    if (likelihood) {
      for (std::size_t i = 0; i < d.y.size(); ++i) {
        const ld mu = at(alpha + d.b[i]) + at(beta + d.b[i]) * d.l[i];
        lp += normal_lpdf(d.y[i], mu, sy);
      }
    }
    if (prior) {
      for (int b = 0; b < B; ++b) lp += normal_lpdf(at(alpha + b), 0, pr.scale_loc);
      lp += normal_lpdf(at(gamma), 0, pr.scale_loc) + normal_lpdf(at(delta), 0, pr.scale_loc);
      for (int b = 0; b < B; ++b) {
        lp += normal_lpdf(at(beta + b), at(gamma) + at(delta) * d.w_bar_b[b], std::exp(at(lsb)));
      }
      lp += positive_lpdf_log(at(lsb), 0, pr.scale_sigma);
      lp += positive_lpdf_log(at(lsy), pr.sigma_y_location, pr.scale_sigma);
    }
  } else if (kind == ModelKind::spatio_temporal) {
    const int alpha = 0, delta = B, tau = 2 * B, gt = 2 * B + T, lsy = 2 * B + 2 * T;
    const ld sy = std::exp(at(lsy));
    if (likelihood) {
      for (std::size_t i = 0; i < d.y.size(); ++i) {
        const int b = d.b[i], t = d.t[i];
        const ld mu = at(alpha + b) + at(tau + t) + (at(gt + t) + at(delta + b) * d.e_bar_b[b]) * d.l[i];
        lp += normal_lpdf(d.y[i], mu, sy);
      }
    }
    if (prior) {
      for (int b = 0; b < B; ++b) {
        lp += normal_lpdf(at(alpha + b), 0, pr.scale_loc) + normal_lpdf(at(delta + b), 0, pr.scale_loc);
      }
      lp += walk(tau) + walk(gt);
      lp += positive_lpdf_log(at(lsy), pr.sigma_y_location, pr.scale_sigma);
    }
  } else {
    const int alpha = 0, gamma = B, delta = 2 * B, tau = 3 * B, phi = 3 * B + T,
              omega = 3 * B + 2 * T, lsy = 3 * B + 3 * T;
    const ld sy = std::exp(at(lsy));
    if (likelihood) {
      for (std::size_t i = 0; i < d.y.size(); ++i) {
        const int b = d.b[i], t = d.t[i];
        const ld slope = at(gamma + b) * d.ew_bar_b[b] + at(delta + b) * d.es_bar_b[b] +
                         at(phi + t) * d.ew_bar_t[t] + at(omega + t) * d.es_bar_t[t];
        lp += normal_lpdf(d.y[i], at(alpha + b) + at(tau + t) + slope * d.l[i], sy);
      }
    }
    if (prior) {
      for (int b = 0; b < B; ++b) {
        lp += normal_lpdf(at(alpha + b), 0, pr.scale_loc) + normal_lpdf(at(gamma + b), 0, pr.scale_loc) +
              normal_lpdf(at(delta + b), 0, pr.scale_loc);
      }
      lp += walk(tau) + walk(phi) + walk(omega);
      lp += positive_lpdf_log(at(lsy), pr.sigma_y_location, pr.scale_sigma);
    }
  }
  return lp;
}

// Central difference of f at x along every coordinate, in extended precision.
inline std::vector<ld> central_difference(const std::function<ld(const std::vector<ld>&)>& f,
                                          const std::vector<double>& x, ld h) {
  std::vector<ld> p(x.begin(), x.end());
  std::vector<ld> g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const ld keep = p[k];
    p[k] = keep + h;
    const ld up = f(p);
    p[k] = keep - h;
    const ld down = f(p);
    p[k] = keep;
    g[k] = (up - down) / (2 * h);
  }
  return g;
}

// Rank-normalized split R-hat (bulk and folded), written directly from the
// definition: full autocovariance is not needed here.
inline double phi_inv(double p) {
  // bisection on erfc, slow but independent of the library's quantile
  double lo = -40, hi = 40;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double cdf = 0.5 * std::erfc(-mid / std::sqrt(2.0));
    (cdf < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline std::vector<std::vector<double>> split_chains(const std::vector<std::vector<double>>& c) {
  std::vector<std::vector<double>> out;
  for (const auto& x : c) {
    const std::size_t h = x.size() / 2;
    out.emplace_back(x.begin(), x.begin() + h);
    out.emplace_back(x.end() - h, x.end());
  }
  return out;
}

inline std::vector<std::vector<double>> rank_normal(const std::vector<std::vector<double>>& c) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t j = 0; j < c.size(); ++j) {
    for (std::size_t i = 0; i < c[j].size(); ++i) all.push_back({c[j][i], j * 1000000 + i});
  }
  std::sort(all.begin(), all.end());
  const double S = static_cast<double>(all.size());
  auto out = c;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t k = i;
    while (k + 1 < all.size() && all[k + 1].first == all[i].first) ++k;
    const double r = 0.5 * ((i + 1) + (k + 1));  // average rank of the tie run
    for (std::size_t m = i; m <= k; ++m) {
      out[all[m].second / 1000000][all[m].second % 1000000] = phi_inv((r - 0.375) / (S + 0.25));
    }
    i = k + 1;
  }
  return out;
}

inline double psrf(const std::vector<std::vector<double>>& c) {
  const ld n = c[0].size();
  std::vector<ld> m, v;
  for (const auto& x : c) {
    ld s = 0;
    for (double e : x) s += e;
    const ld mu = s / n;
    ld ss = 0;
    for (double e : x) ss += (e - mu) * (e - mu);
    m.push_back(mu);
    v.push_back(ss / (n - 1));
  }
  ld mm = 0;
  for (ld e : m) mm += e;
  mm /= m.size();
  ld Bv = 0;
  for (ld e : m) Bv += (e - mm) * (e - mm);
  Bv = Bv * n / (m.size() - 1);
  ld W = 0;
  for (ld e : v) W += e;
  W /= v.size();
  return static_cast<double>(std::sqrt(((n - 1) / n * W + Bv / n) / W));
}

inline double split_rhat(const std::vector<std::vector<double>>& chains) {
  const double bulk = psrf(rank_normal(split_chains(chains)));
  std::vector<double> all;
  for (const auto& x : chains) all.insert(all.end(), x.begin(), x.end());
  const double med = quantile7(all, 0.5);
  auto folded = chains;
  for (auto& x : folded) {
    for (double& e : x) e = std::abs(e - med);
  }
  const double tail = psrf(rank_normal(split_chains(folded)));
  return std::max(bulk, tail);
}

// Multi-chain ESS with Geyer's initial positive + monotone sequence, all
// autocovariances computed up front.
inline double ess(const std::vector<std::vector<double>>& chains) {
  const std::size_t M = chains.size(), N = chains[0].size();
  std::vector<std::vector<ld>> acov(M, std::vector<ld>(N));
  std::vector<ld> means(M);
  for (std::size_t j = 0; j < M; ++j) {
    ld s = 0;
    for (double e : chains[j]) s += e;
    means[j] = s / N;
    for (std::size_t lag = 0; lag < N; ++lag) {
      ld a = 0;
      for (std::size_t i = 0; i + lag < N; ++i) {
        a += (chains[j][i] - means[j]) * (chains[j][i + lag] - means[j]);
      }
      acov[j][lag] = a / N;
    }
  }
  ld W = 0;
  for (std::size_t j = 0; j < M; ++j) W += acov[j][0] * N / (N - 1.0L);
  W /= M;
  ld var_plus = W * (N - 1.0L) / N;
  if (M > 1) {
    ld mm = 0;
    for (ld e : means) mm += e;
    mm /= M;
    ld bv = 0;
    for (ld e : means) bv += (e - mm) * (e - mm);
    var_plus += bv / (M - 1);
  }
  std::vector<ld> rho(N);
  for (std::size_t lag = 0; lag < N; ++lag) {
    ld a = 0;
    for (std::size_t j = 0; j < M; ++j) a += acov[j][lag];
    rho[lag] = 1 - (W - a / M) / var_plus;
  }
  rho[0] = 1;
  // Pairs (rho[2k] + rho[2k+1]) up to the first negative one, made
  // monotone; the even member of the first negative pair is added once when
  // positive (the antithetic correction).
  std::vector<ld> pairs;
  std::size_t k = 0;
  for (; 2 * k + 1 < N; ++k) {
    const ld pk = rho[2 * k] + rho[2 * k + 1];
    if (pk < 0) break;
    pairs.push_back(pk);
  }
  for (std::size_t j = 1; j < pairs.size(); ++j) pairs[j] = std::min(pairs[j], pairs[j - 1]);
  ld tau = -1;
  for (ld p : pairs) tau += 2 * p;
  if (2 * k < N && rho[2 * k] > 0) tau += rho[2 * k];
  const ld total = static_cast<ld>(M) * N;
  tau = std::max(tau, 1 / std::log10(total));
  return static_cast<double>(total / tau);
}

// Asymptotic Kolmogorov survival function P(K > x).
inline double kolmogorov_sf(double x) {
  if (x <= 0) return 1.0;
  double s = 0;
  for (int k = 1; k <= 100; ++k) s += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * x * x);
  return std::clamp(s, 0.0, 1.0);
}

}  // namespace oracle

#include "wellcap/model.hpp"

#include <cmath>
#include <numbers>

#include "wellcap/errors.hpp"

namespace wellcap::model {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

// log Normal(x | mean, sd); adds d/dx to *dx and d/dmean to *dmean when given.
inline double normal_lpdf(double x, double mean, double sd, double* dx = nullptr,
                          double* dmean = nullptr) {
  const double z = (x - mean) / sd;
  if (dx) *dx -= z / sd;
  if (dmean) *dmean += z / sd;
  return -kHalfLog2Pi - std::log(sd) - 0.5 * z * z;
}

// Normal+(location, scale) on sigma = exp(log_sigma), with the log Jacobian.
inline double positive_scale_lpdf(double log_sigma, double location, double scale,
                                  double* dlog_sigma) {
  const double sigma = std::exp(log_sigma);
  const double z = (sigma - location) / scale;
  // mass of the untruncated normal above zero
  const double log_mass = std::log(0.5 * std::erfc(-location / scale / std::numbers::sqrt2));
  if (dlog_sigma) *dlog_sigma += -z / scale * sigma + 1.0;
  return -kHalfLog2Pi - std::log(scale) - 0.5 * z * z - log_mass + log_sigma;
}

// First-order random walk: x[0] ~ N(0, s), x[t] ~ N(x[t-1], s).
inline double random_walk_lpdf(std::span<const double> x, double s, double* grad) {
  double lp = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double prev = t == 0 ? 0.0 : x[t - 1];
    double* dprev = (grad && t > 0) ? grad + (t - 1) : nullptr;
    lp += normal_lpdf(x[t], prev, s, grad ? grad + t : nullptr, dprev);
  }
  return lp;
}

}  // namespace

PriorConfig PriorConfig::defaults_for(ModelKind kind) {
  if (kind == ModelKind::spatial) return {1.0, 0.5, 1.0, 0.0};
  return {0.5, 0.5, 0.5, 0.0};
}

void PriorConfig::validate() const {
  if (!(scale_loc > 0.0) || !(scale_walk > 0.0) || !(scale_sigma > 0.0)) {
    throw DomainError("prior scales must be positive");
  }
  if (!(sigma_y_location >= 0.0)) {
    throw DomainError("sigma_y prior location must be non-negative");
  }
}

ModelData ModelData::from(const data::PreparedDataset& d) {
  ModelData m;
  m.y = d.y;
  m.l = d.l;
  m.block_of = d.block_of;
  m.time_of = d.time_of;
  m.blocks = d.blocks();
  m.times = d.times();
  m.w_bar_b = d.w_bar_b;
  m.e_bar_b = d.e_bar_b;
  m.ew_bar_b = d.ew_bar_b;
  m.es_bar_b = d.es_bar_b;
  m.ew_bar_t = d.ew_bar_t;
  m.es_bar_t = d.es_bar_t;
  return m;
}

// ---------------------------------------------------------------------------

ParamLayout::ParamLayout(ModelKind kind, int blocks, int times)
    : kind_(kind), blocks_(blocks), times_(times) {
  if (blocks < 1) throw DimensionError("layout needs at least one block");
  if (has_time_effects(kind) && times < 1) {
    throw DimensionError("layout needs at least one time period");
  }
  const auto B = static_cast<std::size_t>(blocks);
  const auto T = static_cast<std::size_t>(times);
  switch (kind) {
    case ModelKind::spatial:
      add("alpha", B);
      add("beta", B);
      add("gamma", 1, false);
      add("delta", 1, false);
      add("log_sigma_y", 1, false);
      add("log_sigma_beta", 1, false);
      break;
    case ModelKind::spatio_temporal:
      add("alpha", B);
      add("delta", B);
      add("tau", T);
      add("gamma_t", T);
      add("log_sigma_y", 1, false);
      break;
    case ModelKind::expanded:
      add("alpha", B);
      add("gamma", B);
      add("delta", B);
      add("tau", T);
      add("phi", T);
      add("omega", T);
      add("log_sigma_y", 1, false);
      break;
  }
}

void ParamLayout::add(const std::string& name, std::size_t length, bool indexed) {
  segments_.push_back({name, size_, length, indexed});
  size_ += length;
}

const Segment& ParamLayout::segment(const std::string& name) const {
  for (const auto& s : segments_) {
    if (s.name == name) return s;
  }
  throw DomainError("model kind " + to_string(kind_) + " has no parameter '" + name + "'");
}

bool ParamLayout::has(const std::string& name) const {
  for (const auto& s : segments_) {
    if (s.name == name) return true;
  }
  return false;
}

std::vector<std::string> ParamLayout::names() const {
  std::vector<std::string> out;
  out.reserve(size_);
  for (const auto& s : segments_) {
    if (!s.indexed) {
      out.push_back(s.name);
      continue;
    }
    for (std::size_t i = 0; i < s.length; ++i) {
      out.push_back(s.name + "[" + std::to_string(i + 1) + "]");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Model::Model(ModelKind kind, ModelData data, PriorConfig prior)
    : kind_(kind),
      data_(data),
      prior_(prior),
      layout_(kind, data.blocks, has_time_effects(kind) ? data.times : 1) {
  prior_.validate();
  const std::size_t n = data_.y.size();
  if (data_.l.size() != n || data_.block_of.size() != n) {
    throw DimensionError("model data: y, l and block_of must have equal length");
  }
  const bool timed = has_time_effects(kind);
  if (timed && data_.time_of.size() != n) {
    throw DimensionError("model data: time_of must match y in length");
  }
  auto need = [](std::span<const double> v, int len, const char* name) {
    if (v.size() != static_cast<std::size_t>(len)) {
      throw DimensionError(std::string("model data: '") + name + "' has length " +
                           std::to_string(v.size()) + ", expected " +
                           std::to_string(len));
    }
  };
  switch (kind) {
    case ModelKind::spatial:
      need(data_.w_bar_b, data_.blocks, "w_bar_b");
      break;
    case ModelKind::spatio_temporal:
      need(data_.e_bar_b, data_.blocks, "e_bar_b");
      break;
    case ModelKind::expanded:
      need(data_.ew_bar_b, data_.blocks, "ew_bar_b");
      need(data_.es_bar_b, data_.blocks, "es_bar_b");
      need(data_.ew_bar_t, data_.times, "ew_bar_t");
      need(data_.es_bar_t, data_.times, "es_bar_t");
      break;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (data_.block_of[i] < 0 || data_.block_of[i] >= data_.blocks) {
      throw DimensionError("model data: block index out of range at well " +
                           std::to_string(i));
    }
    if (timed && (data_.time_of[i] < 0 || data_.time_of[i] >= data_.times)) {
      throw DimensionError("model data: time index out of range at well " +
                           std::to_string(i));
    }
  }
}

void Model::check(std::span<const double> params) const {
  if (params.size() != layout_.size()) {
    throw DimensionError("parameter vector has length " + std::to_string(params.size()) +
                         ", kind " + to_string(kind_) + " layout needs " +
                         std::to_string(layout_.size()));
  }
}

double Model::sigma_y(std::span<const double> params) const {
  check(params);
  return std::exp(params[layout_.segment("log_sigma_y").offset]);
}

double Model::slope(std::span<const double> p, int b, int t) const {
  const auto& seg = layout_.segments();
  switch (kind_) {
    case ModelKind::spatial:
      return p[seg[1].offset + b];
    case ModelKind::spatio_temporal:
      return p[seg[3].offset + t] + p[seg[1].offset + b] * data_.e_bar_b[b];
    case ModelKind::expanded:
      return p[seg[1].offset + b] * data_.ew_bar_b[b] +
             p[seg[2].offset + b] * data_.es_bar_b[b] +
             p[seg[4].offset + t] * data_.ew_bar_t[t] +
             p[seg[5].offset + t] * data_.es_bar_t[t];
  }
  return 0.0;
}

void Model::predict_mean(std::span<const double> params, std::span<double> out) const {
  check(params);
  if (out.size() != data_.size()) throw DimensionError("predict_mean: output length");
  const auto& seg = layout_.segments();
  const std::size_t alpha = seg[0].offset;
  const bool timed = has_time_effects(kind_);
  const std::size_t tau = timed ? layout_.segment("tau").offset : 0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const int b = data_.block_of[i];
    const int t = timed ? data_.time_of[i] : 0;
    double mu = params[alpha + b] + slope(params, b, t) * data_.l[i];
    if (timed) mu += params[tau + t];
    out[i] = mu;
  }
}

std::vector<double> Model::predict_mean(std::span<const double> params) const {
  std::vector<double> out(data_.size());
  predict_mean(params, out);
  return out;
}

std::vector<double> Model::posterior_predictive_draw(std::span<const double> params,
                                                     std::mt19937_64& rng) const {
  std::vector<double> out = predict_mean(params);
  const double sigma = sigma_y(params);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (double& v : out) v += sigma * noise(rng);
  return out;
}

std::vector<double> Model::derived_slopes(std::span<const double> params) const {
  check(params);
  if (kind_ != ModelKind::spatio_temporal) {
    throw DomainError("derived slopes beta[b,t] exist only for kind B");
  }
  std::vector<double> out(static_cast<std::size_t>(data_.blocks) * data_.times);
  for (int b = 0; b < data_.blocks; ++b) {
    for (int t = 0; t < data_.times; ++t) {
      out[static_cast<std::size_t>(b) * data_.times + t] = slope(params, b, t);
    }
  }
  return out;
}

double Model::accumulate(std::span<const double> p, std::span<double> grad,
                         bool with_likelihood, bool with_prior) const {
  check(p);
  const bool g = !grad.empty();
  if (g) {
    if (grad.size() != p.size()) throw DimensionError("gradient buffer length");
    std::fill(grad.begin(), grad.end(), 0.0);
  }
  auto at = [&](std::size_t idx) -> double* { return g ? &grad[idx] : nullptr; };

  const auto& seg = layout_.segments();
  const auto& ls_y = layout_.segment("log_sigma_y");
  const double log_sigma = p[ls_y.offset];
  const double sigma = std::exp(log_sigma);
  const bool timed = has_time_effects(kind_);
  const std::size_t tau = timed ? layout_.segment("tau").offset : 0;
  double lp = 0.0;

  if (with_likelihood) {
    const double inv_var = 1.0 / (sigma * sigma);
    double sum_sq = 0.0;
    const std::size_t n = data_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const int b = data_.block_of[i];
      const int t = timed ? data_.time_of[i] : 0;
      const double li = data_.l[i];
      const double mu = p[seg[0].offset + b] + (timed ? p[tau + t] : 0.0) + slope(p, b, t) * li;
      const double r = data_.y[i] - mu;
      sum_sq += r * r;
      if (!g) continue;
      const double d = r * inv_var;  // d lp / d mu
      grad[seg[0].offset + b] += d;
      switch (kind_) {
        case ModelKind::spatial:
          grad[seg[1].offset + b] += d * li;
          break;
        case ModelKind::spatio_temporal:
          grad[tau + t] += d;
          grad[seg[3].offset + t] += d * li;
          grad[seg[1].offset + b] += d * li * data_.e_bar_b[b];
          break;
        case ModelKind::expanded:
          grad[tau + t] += d;
          grad[seg[1].offset + b] += d * li * data_.ew_bar_b[b];
          grad[seg[2].offset + b] += d * li * data_.es_bar_b[b];
          grad[seg[4].offset + t] += d * li * data_.ew_bar_t[t];
          grad[seg[5].offset + t] += d * li * data_.es_bar_t[t];
          break;
      }
    }
    lp += -static_cast<double>(n) * (kHalfLog2Pi + log_sigma) - 0.5 * sum_sq * inv_var;
    if (g) grad[ls_y.offset] += -static_cast<double>(n) + sum_sq * inv_var;
  }

  if (!with_prior) return lp;

  const double s_loc = prior_.scale_loc;
  auto independent = [&](const Segment& s, double scale) {
    for (std::size_t j = 0; j < s.length; ++j) {
      lp += normal_lpdf(p[s.offset + j], 0.0, scale, at(s.offset + j));
    }
  };
  auto walk = [&](const Segment& s) {
    lp += random_walk_lpdf(p.subspan(s.offset, s.length), prior_.scale_walk,
                           g ? grad.data() + s.offset : nullptr);
  };

  switch (kind_) {
    case ModelKind::spatial: {
      const Segment& alpha = seg[0];
      const Segment& beta = seg[1];
      const std::size_t gamma = seg[2].offset;
      const std::size_t delta = seg[3].offset;
      const std::size_t ls_beta = seg[5].offset;
      independent(alpha, s_loc);
      lp += normal_lpdf(p[gamma], 0.0, s_loc, at(gamma));
      lp += normal_lpdf(p[delta], 0.0, s_loc, at(delta));
      const double sigma_beta = std::exp(p[ls_beta]);
      for (int b = 0; b < data_.blocks; ++b) {
        const double w = data_.w_bar_b[b];
        const double mean = p[gamma] + p[delta] * w;
        double dmean = 0.0;
        const double z = (p[beta.offset + b] - mean) / sigma_beta;
        lp += normal_lpdf(p[beta.offset + b], mean, sigma_beta, at(beta.offset + b),
                          g ? &dmean : nullptr);
        if (g) {
          grad[gamma] += dmean;
          grad[delta] += dmean * w;
          grad[ls_beta] += -1.0 + z * z;
        }
      }
      lp += positive_scale_lpdf(p[ls_beta], 0.0, prior_.scale_sigma, at(ls_beta));
      break;
    }
    case ModelKind::spatio_temporal:
      independent(seg[0], s_loc);  // alpha
      independent(seg[1], s_loc);  // delta
      walk(seg[2]);                // tau
      walk(seg[3]);                // gamma_t
      break;
    case ModelKind::expanded:
      independent(seg[0], s_loc);  // alpha
      independent(seg[1], s_loc);  // gamma
      independent(seg[2], s_loc);  // delta
      walk(seg[3]);                // tau
      walk(seg[4]);                // phi
      walk(seg[5]);                // omega
      break;
  }
  lp += positive_scale_lpdf(log_sigma, prior_.sigma_y_location, prior_.scale_sigma,
                            at(ls_y.offset));
  return lp;
}

double Model::log_likelihood(std::span<const double> params) const {
  return accumulate(params, {}, true, false);
}

double Model::log_prior(std::span<const double> params) const {
  return accumulate(params, {}, false, true);
}

double Model::log_posterior(std::span<const double> params) const {
  return accumulate(params, {}, true, true);
}

double Model::log_posterior_gradient(std::span<const double> params,
                                     std::span<double> grad) const {
  if (grad.size() != params.size()) throw DimensionError("gradient buffer length");
  return accumulate(params, grad, true, true);
}

std::vector<double> Model::grad_log_posterior(std::span<const double> params) const {
  std::vector<double> grad(params.size());
  log_posterior_gradient(params, grad);
  return grad;
}

std::vector<double> Model::prior_draw(std::mt19937_64& rng) const {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> p(dim());
  auto fill = [&](const std::string& name, double scale) {
    const Segment& s = layout_.segment(name);
    for (std::size_t j = 0; j < s.length; ++j) p[s.offset + j] = scale * z(rng);
  };
  auto fill_walk = [&](const std::string& name) {
    const Segment& s = layout_.segment(name);
    double prev = 0.0;
    for (std::size_t j = 0; j < s.length; ++j) {
      prev += prior_.scale_walk * z(rng);
      p[s.offset + j] = prev;
    }
  };
  // normal+(location, scale) by rejection
  auto positive = [&](double location, double scale) {
    for (;;) {
      const double v = location + scale * z(rng);
      if (v > 0.0) return std::log(v);
    }
  };
  switch (kind_) {
    case ModelKind::spatial: {
      fill("alpha", prior_.scale_loc);
      fill("gamma", prior_.scale_loc);
      fill("delta", prior_.scale_loc);
      const double log_sigma_beta = positive(0.0, prior_.scale_sigma);
      p[layout_.segment("log_sigma_beta").offset] = log_sigma_beta;
      const std::size_t beta = layout_.segment("beta").offset;
      const double g = p[layout_.segment("gamma").offset];
      const double d = p[layout_.segment("delta").offset];
      for (int b = 0; b < data_.blocks; ++b) {
        p[beta + b] = g + d * data_.w_bar_b[b] + std::exp(log_sigma_beta) * z(rng);
      }
      break;
    }
    case ModelKind::spatio_temporal:
      fill("alpha", prior_.scale_loc);
      fill("delta", prior_.scale_loc);
      fill_walk("tau");
      fill_walk("gamma_t");
      break;
    case ModelKind::expanded:
      fill("alpha", prior_.scale_loc);
      fill("gamma", prior_.scale_loc);
      fill("delta", prior_.scale_loc);
      fill_walk("tau");
      fill_walk("phi");
      fill_walk("omega");
      break;
  }
  p[layout_.segment("log_sigma_y").offset] =
      positive(prior_.sigma_y_location, prior_.scale_sigma);
  return p;
}

}  // namespace wellcap::model

#include "wellcap/nuts.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <thread>

#include "wellcap/errors.hpp"

namespace wellcap::sampler {

void SamplerConfig::validate() const {
  if (chains < 1) throw DomainError("chains must be >= 1");
  if (warmup < 0) throw DomainError("warmup must be >= 0");
  if (draws_per_chain < 1) throw DomainError("draws per chain must be >= 1");
  if (!(target_accept > 0.0 && target_accept < 1.0)) {
    throw DomainError("target acceptance must lie in (0, 1)");
  }
  if (max_tree_depth < 1) throw DomainError("max tree depth must be >= 1");
  if (!(step_size_init > 0.0)) throw DomainError("initial step size must be positive");
  if (!(init_radius >= 0.0)) throw DomainError("init radius must be non-negative");
}

std::vector<std::vector<double>> PosteriorDraws::parameter(std::size_t k) const {
  std::vector<std::vector<double>> out(chains);
  for (int c = 0; c < chains; ++c) {
    out[c].reserve(draws_per_chain);
    for (int d = 0; d < draws_per_chain; ++d) out[c].push_back(at(c, d, k));
  }
  return out;
}

std::vector<double> PosteriorDraws::pooled(std::size_t k) const {
  std::vector<double> out;
  out.reserve(total_draws());
  for (int c = 0; c < chains; ++c) {
    for (int d = 0; d < draws_per_chain; ++d) out.push_back(at(c, d, k));
  }
  return out;
}

std::size_t PosteriorDraws::total_divergences() const {
  std::size_t n = 0;
  for (const auto& s : stats) n += s.divergences;
  return n;
}

double leapfrog(std::span<double> position, std::span<double> momentum,
                std::span<double> gradient, double step, const GradientFn& grad_fn,
                std::span<const double> inv_mass) {
  const std::size_t n = position.size();
  for (std::size_t i = 0; i < n; ++i) momentum[i] += 0.5 * step * gradient[i];
  for (std::size_t i = 0; i < n; ++i) position[i] += step * inv_mass[i] * momentum[i];
  const double logp = grad_fn(position, gradient);
  for (std::size_t i = 0; i < n; ++i) momentum[i] += 0.5 * step * gradient[i];
  return logp;
}

namespace {

using Vec = std::vector<double>;

double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void add_to(Vec& acc, const Vec& v) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

Vec sum(const Vec& a, const Vec& b) {
  Vec out(a);
  add_to(out, b);
  return out;
}

bool no_u_turn(const Vec& p_sharp_minus, const Vec& p_sharp_plus, const Vec& rho) {
  return dot(p_sharp_plus, rho) > 0.0 && dot(p_sharp_minus, rho) > 0.0;
}

struct Point {
  Vec q;
  Vec p;
  Vec g;
  double logp = 0.0;
};

/// Dual averaging of log step size towards a target acceptance statistic.
class StepSizeAdapter {
 public:
  StepSizeAdapter(double target, const AdaptationSettings& s) : delta_(target), s_(s) {}

  void restart(double step) {
    mu_ = std::log(10.0 * step);
    counter_ = 0;
    s_bar_ = 0.0;
    x_bar_ = 0.0;
  }

  double learn(double accept_stat) {
    ++counter_;
    accept_stat = std::min(1.0, accept_stat);
    const double eta = 1.0 / (counter_ + s_.t0);
    s_bar_ = (1.0 - eta) * s_bar_ + eta * (delta_ - accept_stat);
    const double x = mu_ - s_bar_ * std::sqrt(static_cast<double>(counter_)) / s_.gamma;
    const double x_eta = std::pow(static_cast<double>(counter_), -s_.kappa);
    x_bar_ = (1.0 - x_eta) * x_bar_ + x_eta * x;
    return std::exp(x);
  }

  double final_step() const { return std::exp(x_bar_); }

 private:
  double delta_;
  AdaptationSettings s_;
  double mu_ = 0.0;
  int counter_ = 0;
  double s_bar_ = 0.0;
  double x_bar_ = 0.0;
};

/// Windowed diagonal metric estimation: fast initial buffer, doubling slow
/// windows, fast terminal buffer.
class MetricAdapter {
 public:
  MetricAdapter(int warmup, AdaptationSettings s, std::size_t dim)
      : warmup_(warmup), s_(s), mean_(dim, 0.0), m2_(dim, 0.0) {
    if (warmup < 20) {
      enabled_ = false;
      return;
    }
    if (s_.init_buffer + s_.base_window + s_.term_buffer > warmup) {
      s_.init_buffer = static_cast<int>(0.15 * warmup);
      s_.term_buffer = static_cast<int>(0.1 * warmup);
      s_.base_window = warmup - (s_.init_buffer + s_.term_buffer);
    }
    window_size_ = s_.base_window;
    next_window_ = s_.init_buffer + window_size_ - 1;
  }

  bool enabled() const { return enabled_; }

  /// Returns true when a window closed and `inv_mass` was replaced.
  bool learn(Vec& inv_mass, const Vec& q) {
    if (!enabled_) return false;
    if (in_window()) add(q);
    if (end_of_window()) {
      compute_next_window();
      const double n = static_cast<double>(count_);
      for (std::size_t i = 0; i < inv_mass.size(); ++i) {
        const double var = count_ > 1 ? m2_[i] / (n - 1.0) : 1.0;
        inv_mass[i] = (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0));
      }
      reset();
      ++counter_;
      return true;
    }
    ++counter_;
    return false;
  }

 private:
  bool in_window() const {
    return counter_ >= s_.init_buffer && counter_ < warmup_ - s_.term_buffer &&
           counter_ != warmup_;
  }
  bool end_of_window() const { return counter_ == next_window_ && counter_ != warmup_; }

  void compute_next_window() {
    const int last = warmup_ - s_.term_buffer - 1;
    if (next_window_ == last) return;
    window_size_ *= 2;
    next_window_ = counter_ + window_size_;
    if (next_window_ != last) {
      const int boundary = next_window_ + 2 * window_size_;
      if (boundary >= warmup_ - s_.term_buffer) next_window_ = last;
    }
  }

  void add(const Vec& q) {
    ++count_;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double d = q[i] - mean_[i];
      mean_[i] += d / static_cast<double>(count_);
      m2_[i] += d * (q[i] - mean_[i]);
    }
  }

  void reset() {
    count_ = 0;
    std::fill(mean_.begin(), mean_.end(), 0.0);
    std::fill(m2_.begin(), m2_.end(), 0.0);
  }

  int warmup_;
  AdaptationSettings s_;
  bool enabled_ = true;
  int counter_ = 0;
  int window_size_ = 0;
  int next_window_ = 0;
  std::size_t count_ = 0;
  Vec mean_;
  Vec m2_;
};

struct Transition {
  double accept_stat = 0.0;
  int depth = 0;
  bool divergent = false;
  std::size_t leapfrogs = 0;
};

class Chain {
 public:
  Chain(const GradientFn& f, std::size_t dim, const SamplerConfig& cfg,
        const AdaptationSettings& adapt, int index)
      : f_(f), dim_(dim), cfg_(cfg), adapt_(adapt), inv_mass_(dim, 1.0) {
    const auto seed = cfg.seed;
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), 0x5eedu};
    rng_.seed(seq);
  }

  ChainStats run(std::span<double> out) {
    Point z = initial_point();
    step_ = cfg_.step_size_init;
    init_step_size(z);

    StepSizeAdapter step_adapter(cfg_.target_accept, adapt_);
    step_adapter.restart(step_);
    MetricAdapter metric(cfg_.warmup, adapt_, dim_);

    ChainStats stats;
    stats.tree_depth_histogram.assign(cfg_.max_tree_depth + 1, 0);
    double accept_sum = 0.0;
    const int total = cfg_.warmup + cfg_.draws_per_chain;
    for (int it = 0; it < total; ++it) {
      const Transition t = transition(z);
      if (it < cfg_.warmup) {
        step_ = step_adapter.learn(t.accept_stat);
        if (metric.learn(inv_mass_, z.q)) {
          init_step_size(z);
          step_adapter.restart(step_);
        }
        if (it == cfg_.warmup - 1) step_ = step_adapter.final_step();
        continue;
      }
      const int d = it - cfg_.warmup;
      std::copy(z.q.begin(), z.q.end(), out.begin() + static_cast<std::ptrdiff_t>(d * dim_));
      if (t.divergent) ++stats.divergences;
      ++stats.tree_depth_histogram[t.depth];
      accept_sum += t.accept_stat;
      stats.leapfrog_steps += t.leapfrogs;
    }
    stats.step_size = step_;
    stats.inv_mass = inv_mass_;
    stats.mean_accept_stat = accept_sum / cfg_.draws_per_chain;
    return stats;
  }

 private:
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }

  Point initial_point() {
    Point z;
    z.q.resize(dim_);
    z.p.assign(dim_, 0.0);
    z.g.resize(dim_);
    std::uniform_real_distribution<double> jitter(-cfg_.init_radius, cfg_.init_radius);
    for (int attempt = 0; attempt < 100; ++attempt) {
      for (double& v : z.q) v = jitter(rng_);
      z.logp = f_(z.q, z.g);
      const bool ok = std::isfinite(z.logp) &&
                      std::all_of(z.g.begin(), z.g.end(), [](double v) { return std::isfinite(v); });
      if (ok) return z;
    }
    throw StartupError("no finite log density after 100 random initializations");
  }

  double hamiltonian(const Point& z) const {
    double k = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) k += z.p[i] * z.p[i] * inv_mass_[i];
    return -z.logp + 0.5 * k;
  }

  void sample_momentum(Point& z) {
    std::normal_distribution<double> n01(0.0, 1.0);
    for (std::size_t i = 0; i < dim_; ++i) z.p[i] = n01(rng_) / std::sqrt(inv_mass_[i]);
  }

  Vec p_sharp(const Point& z) const {
    Vec out(dim_);
    for (std::size_t i = 0; i < dim_; ++i) out[i] = inv_mass_[i] * z.p[i];
    return out;
  }

  void evolve(Point& z, double eps) {
    z.logp = leapfrog(z.q, z.p, z.g, eps, f_, inv_mass_);
  }

  double energy(const Point& z) const {
    const double h = hamiltonian(z);
    return std::isnan(h) ? std::numeric_limits<double>::infinity() : h;
  }

  // Doubles or halves the step until the one-step acceptance crosses 0.8.
  void init_step_size(Point& z) {
    const Point start = z;
    sample_momentum(z);
    double h0 = hamiltonian(z);
    evolve(z, step_);
    double delta_h = h0 - energy(z);
    const int direction = delta_h > std::log(0.8) ? 1 : -1;
    while (true) {
      z = start;
      sample_momentum(z);
      h0 = hamiltonian(z);
      evolve(z, step_);
      delta_h = h0 - energy(z);
      if (direction == 1 && !(delta_h > std::log(0.8))) break;
      if (direction == -1 && !(delta_h < std::log(0.8))) break;
      step_ = direction == 1 ? 2.0 * step_ : 0.5 * step_;
      if (step_ > 1e7) throw StartupError("step size diverged to infinity during initialization");
      if (step_ == 0.0) throw StartupError("step size collapsed to zero during initialization");
    }
    z = start;
  }

  bool build_tree(int depth, Point& z, Point& z_propose, Vec& p_sharp_beg, Vec& p_sharp_end,
                  Vec& rho, Vec& p_beg, Vec& p_end, double h0, double sign,
                  std::size_t& n_leapfrog, double& log_sum_weight, double& sum_metro_prob) {
    if (depth == 0) {
      evolve(z, sign * step_);
      ++n_leapfrog;
      const double h = energy(z);
      if (h - h0 > kDivergenceThreshold) divergent_ = true;
      log_sum_weight = log_sum_exp(log_sum_weight, h0 - h);
      sum_metro_prob += h0 - h > 0.0 ? 1.0 : std::exp(h0 - h);
      z_propose = z;
      p_sharp_beg = p_sharp(z);
      p_sharp_end = p_sharp_beg;
      add_to(rho, z.p);
      p_beg = z.p;
      p_end = p_beg;
      return !divergent_;
    }

    const double neg_inf = -std::numeric_limits<double>::infinity();
    double lsw_init = neg_inf;
    Vec p_init_end(dim_), p_sharp_init_end(dim_), rho_init(dim_, 0.0);
    if (!build_tree(depth - 1, z, z_propose, p_sharp_beg, p_sharp_init_end, rho_init, p_beg,
                    p_init_end, h0, sign, n_leapfrog, lsw_init, sum_metro_prob)) {
      return false;
    }

    Point z_propose_final = z;
    double lsw_final = neg_inf;
    Vec p_final_beg(dim_), p_sharp_final_beg(dim_), rho_final(dim_, 0.0);
    if (!build_tree(depth - 1, z, z_propose_final, p_sharp_final_beg, p_sharp_end, rho_final,
                    p_final_beg, p_end, h0, sign, n_leapfrog, lsw_final, sum_metro_prob)) {
      return false;
    }

    const double lsw_subtree = log_sum_exp(lsw_init, lsw_final);
    log_sum_weight = log_sum_exp(log_sum_weight, lsw_subtree);
    if (lsw_final > lsw_subtree || uniform() < std::exp(lsw_final - lsw_subtree)) {
      z_propose = std::move(z_propose_final);
    }

    const Vec rho_subtree = sum(rho_init, rho_final);
    add_to(rho, rho_subtree);
    bool persist = no_u_turn(p_sharp_beg, p_sharp_end, rho_subtree);
    persist = persist && no_u_turn(p_sharp_beg, p_sharp_final_beg, sum(rho_init, p_final_beg));
    persist = persist && no_u_turn(p_sharp_init_end, p_sharp_end, sum(rho_final, p_init_end));
    return persist;
  }

  Transition transition(Point& current) {
    Point z = current;
    sample_momentum(z);
    divergent_ = false;

    Point z_fwd = z, z_bck = z, z_sample = z, z_propose = z;
    const Vec ps = p_sharp(z);
    Vec p_fwd_fwd = z.p, p_sharp_fwd_fwd = ps;
    Vec p_fwd_bck = z.p, p_sharp_fwd_bck = ps;
    Vec p_bck_fwd = z.p, p_sharp_bck_fwd = ps;
    Vec p_bck_bck = z.p, p_sharp_bck_bck = ps;
    Vec rho = z.p;

    double log_sum_weight = 0.0;
    const double h0 = hamiltonian(z);
    std::size_t n_leapfrog = 0;
    double sum_metro_prob = 0.0;
    int depth = 0;

    while (depth < cfg_.max_tree_depth) {
      Vec rho_fwd(dim_, 0.0), rho_bck(dim_, 0.0);
      double lsw_subtree = -std::numeric_limits<double>::infinity();
      bool valid = false;
      if (uniform() > 0.5) {
        // old trajectory becomes the backward part
        rho_bck = rho;
        p_bck_fwd = p_fwd_fwd;
        p_sharp_bck_fwd = p_sharp_fwd_fwd;
        valid = build_tree(depth, z_fwd, z_propose, p_sharp_fwd_bck, p_sharp_fwd_fwd, rho_fwd,
                           p_fwd_bck, p_fwd_fwd, h0, 1.0, n_leapfrog, lsw_subtree,
                           sum_metro_prob);
      } else {
        rho_fwd = rho;
        p_fwd_bck = p_bck_bck;
        p_sharp_fwd_bck = p_sharp_bck_bck;
        valid = build_tree(depth, z_bck, z_propose, p_sharp_bck_fwd, p_sharp_bck_bck, rho_bck,
                           p_bck_fwd, p_bck_bck, h0, -1.0, n_leapfrog, lsw_subtree,
                           sum_metro_prob);
      }
      if (!valid) break;
      ++depth;

      if (lsw_subtree > log_sum_weight || uniform() < std::exp(lsw_subtree - log_sum_weight)) {
        z_sample = z_propose;
      }
      log_sum_weight = log_sum_exp(log_sum_weight, lsw_subtree);

      rho = sum(rho_bck, rho_fwd);
      bool persist = no_u_turn(p_sharp_bck_bck, p_sharp_fwd_fwd, rho);
      persist = persist && no_u_turn(p_sharp_bck_bck, p_sharp_fwd_bck, sum(rho_bck, p_fwd_bck));
      persist = persist && no_u_turn(p_sharp_bck_fwd, p_sharp_fwd_fwd, sum(rho_fwd, p_bck_fwd));
      if (!persist) break;
    }

    current.q = std::move(z_sample.q);
    current.g = std::move(z_sample.g);
    current.logp = z_sample.logp;
    Transition t;
    t.accept_stat = n_leapfrog > 0 ? sum_metro_prob / static_cast<double>(n_leapfrog) : 0.0;
    t.depth = depth;
    t.divergent = divergent_;
    t.leapfrogs = n_leapfrog;
    return t;
  }

  const GradientFn& f_;
  std::size_t dim_;
  SamplerConfig cfg_;
  AdaptationSettings adapt_;
  Vec inv_mass_;
  double step_ = 1.0;
  bool divergent_ = false;
  std::mt19937_64 rng_;
};

}  // namespace

PosteriorDraws run_nuts(const GradientFn& grad_fn, std::size_t dim,
                        const SamplerConfig& config, const AdaptationSettings& adaptation) {
  config.validate();
  if (dim < 1) throw DimensionError("sampler needs dim >= 1");
  const auto start = std::chrono::steady_clock::now();

  PosteriorDraws out;
  out.chains = config.chains;
  out.draws_per_chain = config.draws_per_chain;
  out.dim = dim;
  out.values.assign(out.total_draws() * dim, 0.0);
  out.stats.resize(config.chains);

  std::vector<std::exception_ptr> errors(config.chains);
  auto run_chain = [&](int c) {
    try {
      Chain chain(grad_fn, dim, config, adaptation, c);
      const std::size_t stride = static_cast<std::size_t>(config.draws_per_chain) * dim;
      out.stats[c] = chain.run(std::span<double>(out.values).subspan(c * stride, stride));
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };

  if (config.parallel_chains && config.chains > 1) {
    std::vector<std::jthread> threads;
    threads.reserve(config.chains);
    for (int c = 0; c < config.chains; ++c) threads.emplace_back(run_chain, c);
  } else {
    for (int c = 0; c < config.chains; ++c) run_chain(c);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  out.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace wellcap::sampler

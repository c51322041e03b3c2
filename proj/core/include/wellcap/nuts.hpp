#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace wellcap::sampler {

/// Evaluates the log density at `q`, writes its gradient into `grad`, and
/// returns the log density. Must be safe to call from several threads.
using GradientFn = std::function<double(std::span<const double> q, std::span<double> grad)>;

struct SamplerConfig {
  int chains = 3;
  int warmup = 500;
  int draws_per_chain = 2500;
  double target_accept = 0.8;
  int max_tree_depth = 10;
  std::uint64_t seed = 1;
  double step_size_init = 1.0;
  double init_radius = 2.0;  // initial coordinates ~ U(-r, r)
  bool parallel_chains = true;

  void validate() const;
};

/// Warm-up schedule constants.
struct AdaptationSettings {
  double gamma = 0.05;
  double t0 = 10.0;
  double kappa = 0.75;
  int init_buffer = 75;
  int term_buffer = 50;
  int base_window = 25;
};

inline constexpr double kDivergenceThreshold = 1000.0;

struct ChainStats {
  std::size_t divergences = 0;
  std::vector<std::size_t> tree_depth_histogram;  // index = depth reached
  double step_size = 0.0;                         // after adaptation
  std::vector<double> inv_mass;                   // adapted diagonal inverse metric
  double mean_accept_stat = 0.0;                  // post-warm-up
  std::size_t leapfrog_steps = 0;                 // post-warm-up
};

/// Post-warm-up draws, stored chain-major: values[(c * draws + d) * dim + k].
struct PosteriorDraws {
  int chains = 0;
  int draws_per_chain = 0;
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<ChainStats> stats;
  double wall_time_seconds = 0.0;

  double at(int chain, int draw, std::size_t k) const {
    return values[(static_cast<std::size_t>(chain) * draws_per_chain + draw) * dim + k];
  }
  std::span<const double> draw(int chain, int d) const {
    return {values.data() + (static_cast<std::size_t>(chain) * draws_per_chain + d) * dim,
            dim};
  }
  /// One vector per chain for parameter k.
  std::vector<std::vector<double>> parameter(std::size_t k) const;
  /// All chains pooled for parameter k.
  std::vector<double> pooled(std::size_t k) const;
  std::size_t total_divergences() const;
  std::size_t total_draws() const {
    return static_cast<std::size_t>(chains) * draws_per_chain;
  }
};

/// One leapfrog step with diagonal inverse mass. `gradient` holds the log
/// density gradient at `position` on entry and at the new position on exit.
/// Returns the log density at the new position (possibly non-finite).
double leapfrog(std::span<double> position, std::span<double> momentum,
                std::span<double> gradient, double step, const GradientFn& grad_fn,
                std::span<const double> inv_mass);

/// Multinomial No-U-Turn sampler with dual-averaging step size and windowed
/// diagonal metric adaptation. Chains run on separate threads with streams
/// derived from (seed, chain index); results are identical for equal seeds.
/// Throws StartupError when no finite initial point is found in 100 tries.
PosteriorDraws run_nuts(const GradientFn& grad_fn, std::size_t dim,
                        const SamplerConfig& config,
                        const AdaptationSettings& adaptation = {});

}  // namespace wellcap::sampler

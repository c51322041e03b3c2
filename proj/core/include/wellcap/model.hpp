#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wellcap/dataset.hpp"
#include "wellcap/kind.hpp"

namespace wellcap::model {

/// Prior scales (standard deviations).
struct PriorConfig {
  double scale_loc = 0.5;    // normal priors on block/scalar coefficients
  double scale_walk = 0.5;   // random-walk increments and their initial value
  double scale_sigma = 0.5;  // normal+ priors on the scale parameters
  /// Location of the normal+ prior on sigma_Y. Zero gives the half-normal;
  /// a positive value with a tiny scale pins sigma_Y near that value.
  double sigma_y_location = 0.0;

  /// A: 1 / 0.5 / 1. B and C: 0.5 throughout.
  static PriorConfig defaults_for(ModelKind kind);
  void validate() const;
};

/// Non-owning view of the arrays a model reads. Group indices are 0-based.
/// Only the group averages used by the kind need to be populated.
struct ModelData {
  std::span<const double> y;
  std::span<const double> l;
  std::span<const int> block_of;
  std::span<const int> time_of;
  int blocks = 0;
  int times = 1;
  std::span<const double> w_bar_b;
  std::span<const double> e_bar_b;
  std::span<const double> ew_bar_b;
  std::span<const double> es_bar_b;
  std::span<const double> ew_bar_t;
  std::span<const double> es_bar_t;

  static ModelData from(const data::PreparedDataset& d);
  std::size_t size() const { return y.size(); }
};

/// A contiguous named run of the flat parameter vector.
struct Segment {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;
  bool indexed = true;  // scalar parameters are written without [i]
};

/// Flat unconstrained parameter layout:
///
///   A: alpha[B] beta[B] gamma delta log_sigma_y log_sigma_beta   (2B+4)
///   B: alpha[B] delta[B] tau[T] gamma_t[T] log_sigma_y           (2B+2T+1)
///   C: alpha[B] gamma[B] delta[B] tau[T] phi[T] omega[T] log_sigma_y (3B+3T+1)
class ParamLayout {
 public:
  ParamLayout(ModelKind kind, int blocks, int times);

  ModelKind kind() const { return kind_; }
  int blocks() const { return blocks_; }
  int times() const { return times_; }
  std::size_t size() const { return size_; }
  const std::vector<Segment>& segments() const { return segments_; }

  /// Throws DomainError for names the kind does not have.
  const Segment& segment(const std::string& name) const;
  bool has(const std::string& name) const;

  /// Column names, 1-based: "alpha[3]", "tau[2]", "log_sigma_y".
  std::vector<std::string> names() const;

 private:
  void add(const std::string& name, std::size_t length, bool indexed = true);

  ModelKind kind_;
  int blocks_;
  int times_;
  std::size_t size_ = 0;
  std::vector<Segment> segments_;
};

class Model {
 public:
  /// `data` must outlive the model.
  Model(ModelKind kind, ModelData data, PriorConfig prior);

  ModelKind kind() const { return kind_; }
  const ParamLayout& layout() const { return layout_; }
  const ModelData& data() const { return data_; }
  const PriorConfig& prior() const { return prior_; }
  std::size_t dim() const { return layout_.size(); }

  /// Sum of normal log-densities of y around the predictive means.
  double log_likelihood(std::span<const double> params) const;
  /// Includes the log-sigma Jacobian terms.
  double log_prior(std::span<const double> params) const;
  /// May be non-finite; callers treat that as a rejection signal.
  double log_posterior(std::span<const double> params) const;

  /// Writes the analytic gradient into `grad` and returns the log posterior.
  double log_posterior_gradient(std::span<const double> params,
                                std::span<double> grad) const;
  std::vector<double> grad_log_posterior(std::span<const double> params) const;

  void predict_mean(std::span<const double> params, std::span<double> out) const;
  std::vector<double> predict_mean(std::span<const double> params) const;

  /// y_rep[i] ~ Normal(mu[i], sigma_Y), independent across wells.
  std::vector<double> posterior_predictive_draw(std::span<const double> params,
                                                std::mt19937_64& rng) const;

  /// Kind B slopes beta[b,t] = gamma_t + delta_b * E_b, row-major B x T.
  std::vector<double> derived_slopes(std::span<const double> params) const;

  double sigma_y(std::span<const double> params) const;

  /// One draw of the unconstrained parameters from the prior.
  std::vector<double> prior_draw(std::mt19937_64& rng) const;

 private:
  void check(std::span<const double> params) const;
  double slope(std::span<const double> p, int b, int t) const;
  double accumulate(std::span<const double> params, std::span<double> grad,
                    bool with_likelihood, bool with_prior) const;

  ModelKind kind_;
  ModelData data_;
  PriorConfig prior_;
  ParamLayout layout_;
};

}  // namespace wellcap::model

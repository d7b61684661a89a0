#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "epirenew/design.hpp"
#include "epirenew/layout.hpp"
#include "epirenew/observation.hpp"
#include "epirenew/renewal.hpp"

namespace epirenew {

/// basic: infections are the deterministic expectation given R and seeds.
/// latent: infections are sampled parameters with per-step priors.
enum class ModelMode { basic, latent };

struct ObservationModelSpec {
  std::string name;
  ObsFamily family = ObsFamily::neg_binomial;
  DiscretePmf delay;
  std::optional<double> fixed_phi;
  double phi_prior_scale = 10.0;  // half-normal; applies to phi-1 for quasi_poisson
  /// Exactly one of the two must be set (binomial: constant only).
  std::optional<double> constant_ascertainment;
  std::optional<DesignSpec> ascertainment;
};

struct ModelSpec {
  DesignSpec transmission;
  DiscretePmf generation;
  std::vector<ObservationModelSpec> observations;
  SeedingConfig seeding;
  ModelMode mode = ModelMode::basic;
  LagFamily latent_family = LagFamily::gamma;
  std::optional<double> fixed_dispersion;
  double dispersion_prior_scale = 1.0;  // half-normal on d
  bool population_adjustment = false;
};

struct RegionData {
  std::string name;
  double population = 0.0;  // required for population adjustment and binomial series
  int horizon = 0;
  std::map<std::string, std::vector<double>> covariates;
  std::vector<ObservedSeries> series;  // aligned with ModelSpec::observations
};

/// Deterministic quantities at one parameter point.
struct ModelState {
  std::vector<std::vector<double>> reproduction;               // [region][day]
  std::vector<InfectionPath> infections;                       // [region]
  std::vector<std::vector<std::vector<double>>> expected_obs;  // [region][series][day]
};

/// Joint posterior of the renewal regression model over several regions,
/// with a hand-coded reverse-mode gradient through the full pipeline
/// (priors, renewal recursion, delay convolutions, likelihoods).
class RenewalModel {
 public:
  RenewalModel(ModelSpec spec, std::vector<RegionData> data);

  const ModelSpec& spec() const { return spec_; }
  const std::vector<RegionData>& data() const { return data_; }
  const ParameterLayout& layout() const { return layout_; }
  int dim() const { return layout_.size(); }
  int n_regions() const { return static_cast<int>(data_.size()); }

  /// Log posterior; accumulates the exact gradient into *grad (resized and
  /// zeroed) when given. Out-of-support states return -inf with a zero
  /// gradient. Weibull latent models reject gradient requests.
  double log_posterior(const Eigen::VectorXd& params, Eigen::VectorXd* grad) const;

  /// Per-day log-likelihood terms in a fixed order (region-major, then
  /// series, then unmasked day); used for WAIC.
  std::vector<double> pointwise_log_likelihood(const Eigen::VectorXd& params) const;
  int n_pointwise() const { return n_pointwise_; }

  ModelState evaluate(const Eigen::VectorXd& params) const;

  /// Prior-median start with small jitter; latent infections start at the
  /// deterministic path. Retries with shrinking jitter until the posterior
  /// is finite.
  Eigen::VectorXd initial_point(Rng& rng) const;

  const Design& transmission_design() const { return transmission_; }
  const Design* ascertainment_design(int series_index) const;

  double dispersion(const Eigen::VectorXd& params) const;
  double phi(const Eigen::VectorXd& params, int series_index) const;
  std::vector<double> seed_values(const Eigen::VectorXd& params, int region) const;

  /// Parameter names for the seeding level / transmission intercept
  /// correlation diagnostic ("" when the model has no intercept).
  std::string seed_level_param_name(int region) const;
  std::string intercept_param_name() const;

 private:
  struct RegionForward;
  double region_contribution(const Eigen::VectorXd& params, int region, Eigen::VectorXd* grad,
                             std::vector<double>* pointwise) const;
  std::vector<double> seeds_from(const Eigen::VectorXd& params, int region) const;

  ModelSpec spec_;
  std::vector<RegionData> data_;
  ParameterLayout layout_;
  Design transmission_;
  std::vector<std::optional<Design>> ascertainment_;

  std::vector<int> off_phi_;        // per series, -1 if fixed/absent
  int off_seed_level_ = -1;         // size n_regions
  int off_seed_noise_ = -1;         // size n_regions * window, -1 if disabled
  int off_log_d_ = -1;              // latent mode with sampled dispersion
  std::vector<int> off_latent_;     // per region, size horizon
  int n_pointwise_ = 0;
};

}  // namespace epirenew

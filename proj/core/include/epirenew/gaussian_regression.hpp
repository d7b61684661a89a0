#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "epirenew/design.hpp"
#include "epirenew/hmc.hpp"
#include "epirenew/layout.hpp"

namespace epirenew {

// Per-group outcome series aligned with the covariate rows; NaN entries and
// masked days are skipped. Optional per-day standard errors are added in
// quadrature to the residual scale.
struct GaussianGroupData {
  std::string group;
  std::vector<double> outcomes;
  std::vector<double> obs_sd;  // empty or per-day
};

// Linear regression of a real outcome on a shared design, with a half-normal
// prior on the residual scale. Serves as the second stage of hierarchical
// pipelines where a per-group quantity is regressed on covariates.
class GaussianRegressionModel : public TargetDensity {
 public:
  GaussianRegressionModel(DesignSpec design, std::vector<RegionCovariates> covariates,
                          std::vector<GaussianGroupData> outcomes,
                          double sigma_prior_scale = 1.0);

  int dim() const override { return layout_.size(); }
  double log_density(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const override;
  Eigen::VectorXd initial_point(Rng& rng) const override;
  std::vector<std::string> param_names() const override { return layout_.param_names(); }

  const ParameterLayout& layout() const { return layout_; }
  const Design& design() const { return design_; }
  double sigma(const Eigen::VectorXd& params) const;
  int n_observations() const { return n_obs_; }

  // Per-observation log densities in group-major day order, finite outcomes
  // only; length n_observations().
  std::vector<double> pointwise_log_likelihood(const Eigen::VectorXd& params) const;

  // Posterior-mean absolute residual on the outcome scale.
  double mean_absolute_error(const Eigen::VectorXd& params) const;

 private:
  Design design_;
  std::vector<GaussianGroupData> outcomes_;
  double sigma_prior_scale_;
  ParameterLayout layout_;
  int off_log_sigma_ = -1;
  int n_obs_ = 0;
};

}  // namespace epirenew

#pragma once

#include "epirenew/hmc.hpp"
#include "epirenew/model.hpp"

namespace epirenew {

// Exposes a renewal model to the samplers. The model must outlive the target.
class ModelTarget : public TargetDensity {
 public:
  explicit ModelTarget(const RenewalModel& model) : model_(model) {}

  int dim() const override { return model_.dim(); }
  double log_density(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const override {
    return model_.log_posterior(x, grad);
  }
  Eigen::VectorXd initial_point(Rng& rng) const override { return model_.initial_point(rng); }
  std::vector<std::string> param_names() const override {
    return model_.layout().param_names();
  }

 private:
  const RenewalModel& model_;
};

// Runs the configured sampler; models whose latent family has no gradient are
// switched to the random walk kernel automatically.
PosteriorDraws fit_model(const RenewalModel& model, SamplerConfig config);

}  // namespace epirenew

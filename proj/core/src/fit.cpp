#include "epirenew/fit.hpp"

namespace epirenew {

PosteriorDraws fit_model(const RenewalModel& model, SamplerConfig config) {
  if (config.algorithm == SamplerAlgorithm::nuts &&
      model.spec().mode == ModelMode::latent &&
      model.spec().latent_family == LagFamily::weibull) {
    config.algorithm = SamplerAlgorithm::random_walk;
  }
  ModelTarget target(model);
  return run_sampler(target, config);
}

}  // namespace epirenew

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "epirenew/draws.hpp"
#include "epirenew/gaussian_regression.hpp"
#include "epirenew/model.hpp"

namespace epirenew {

// Widely applicable information criterion on the expected log predictive
// density scale (higher is better).
struct WaicResult {
  double elpd = 0.0;
  double se = 0.0;
  double p_eff = 0.0;
  std::vector<double> pointwise;
};

// log_lik has one row per draw and one column per observation.
WaicResult waic(const Eigen::MatrixXd& log_lik);

struct WaicComparison {
  std::string model_a;
  std::string model_b;
  double elpd_diff = 0.0;  // elpd_a - elpd_b
  double se_diff = 0.0;
};

// Paired comparison; both results must cover the same observations.
WaicComparison compare_waic(const WaicResult& a, const WaicResult& b,
                            const std::string& name_a, const std::string& name_b);

// Stacks per-draw pointwise log likelihoods for a fitted model.
Eigen::MatrixXd pointwise_matrix(const RenewalModel& model, const PosteriorDraws& draws,
                                 int stride = 1);
Eigen::MatrixXd pointwise_matrix(const GaussianRegressionModel& model,
                                 const PosteriorDraws& draws, int stride = 1);

}  // namespace epirenew

#include "epirenew/gaussian_regression.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "epirenew/math_utils.hpp"
#include "epirenew/priors.hpp"

namespace epirenew {

GaussianRegressionModel::GaussianRegressionModel(DesignSpec design,
                                                 std::vector<RegionCovariates> covariates,
                                                 std::vector<GaussianGroupData> outcomes,
                                                 double sigma_prior_scale)
    : design_(std::move(design), covariates),
      outcomes_(std::move(outcomes)),
      sigma_prior_scale_(sigma_prior_scale) {
  if (!(sigma_prior_scale_ > 0.0)) {
    throw std::invalid_argument("sigma prior scale must be > 0");
  }
  if (static_cast<int>(outcomes_.size()) != design_.n_regions()) {
    throw std::invalid_argument("outcome groups must match covariate groups");
  }
  for (int m = 0; m < design_.n_regions(); ++m) {
    const auto& g = outcomes_[static_cast<std::size_t>(m)];
    if (static_cast<int>(g.outcomes.size()) != design_.horizon(m)) {
      throw std::invalid_argument("outcome length mismatch in group " + g.group);
    }
    if (!g.obs_sd.empty() && g.obs_sd.size() != g.outcomes.size()) {
      throw std::invalid_argument("obs_sd length mismatch in group " + g.group);
    }
    for (double v : g.outcomes) {
      if (std::isfinite(v)) ++n_obs_;
    }
  }
  if (n_obs_ == 0) throw std::invalid_argument("no finite outcomes to fit");
  design_.register_blocks(layout_, "");
  off_log_sigma_ = layout_.add("log_sigma", 1);
}

double GaussianRegressionModel::sigma(const Eigen::VectorXd& params) const {
  return std::exp(params[off_log_sigma_]);
}

double GaussianRegressionModel::log_density(const Eigen::VectorXd& x,
                                            Eigen::VectorXd* grad) const {
  if (static_cast<int>(x.size()) != dim()) {
    throw std::invalid_argument("parameter vector has wrong dimension");
  }
  if (grad != nullptr) {
    grad->resize(dim());
    grad->setZero();
  }
  double lp = design_.log_prior(x, grad);
  double* gs = grad != nullptr ? grad->data() + off_log_sigma_ : nullptr;
  lp += half_normal_log_prior(x[off_log_sigma_], sigma_prior_scale_, gs);
  const double s = sigma(x);
  const double s2 = s * s;

  for (int m = 0; m < design_.n_regions(); ++m) {
    const auto& g = outcomes_[static_cast<std::size_t>(m)];
    Eigen::VectorXd eta = design_.linear_predictor(x, m);
    Eigen::VectorXd eta_bar;
    if (grad != nullptr) eta_bar = Eigen::VectorXd::Zero(eta.size());
    for (int t = 0; t < eta.size(); ++t) {
      double y = g.outcomes[static_cast<std::size_t>(t)];
      if (!std::isfinite(y)) continue;
      double mean = design_.link().inverse(eta[t]);
      double extra = g.obs_sd.empty() ? 0.0 : g.obs_sd[static_cast<std::size_t>(t)];
      double var = s2 + extra * extra;
      double resid = y - mean;
      lp += -0.5 * kLogTwoPi - 0.5 * std::log(var) - 0.5 * resid * resid / var;
      if (grad != nullptr) {
        double mean_bar = resid / var;
        eta_bar[t] += mean_bar * design_.link().inverse_derivative(eta[t]);
        // d lp / d log sigma through var = sigma^2 + extra^2
        double dvar = -0.5 / var + 0.5 * resid * resid / (var * var);
        (*grad)[off_log_sigma_] += dvar * 2.0 * s2;
      }
    }
    if (grad != nullptr) design_.backprop_linear_predictor(x, m, eta_bar, *grad);
  }
  if (!std::isfinite(lp)) {
    if (grad != nullptr) grad->setZero();
    return kNegInf;
  }
  return lp;
}

std::vector<double> GaussianRegressionModel::pointwise_log_likelihood(
    const Eigen::VectorXd& params) const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_obs_));
  const double s = sigma(params);
  const double s2 = s * s;
  for (int m = 0; m < design_.n_regions(); ++m) {
    const auto& g = outcomes_[static_cast<std::size_t>(m)];
    Eigen::VectorXd eta = design_.linear_predictor(params, m);
    for (int t = 0; t < eta.size(); ++t) {
      double y = g.outcomes[static_cast<std::size_t>(t)];
      if (!std::isfinite(y)) continue;
      double mean = design_.link().inverse(eta[t]);
      double extra = g.obs_sd.empty() ? 0.0 : g.obs_sd[static_cast<std::size_t>(t)];
      double var = s2 + extra * extra;
      double resid = y - mean;
      out.push_back(-0.5 * kLogTwoPi - 0.5 * std::log(var) - 0.5 * resid * resid / var);
    }
  }
  return out;
}

double GaussianRegressionModel::mean_absolute_error(const Eigen::VectorXd& params) const {
  double total = 0.0;
  long n = 0;
  for (int m = 0; m < design_.n_regions(); ++m) {
    const auto& g = outcomes_[static_cast<std::size_t>(m)];
    Eigen::VectorXd eta = design_.linear_predictor(params, m);
    for (int t = 0; t < eta.size(); ++t) {
      double y = g.outcomes[static_cast<std::size_t>(t)];
      if (!std::isfinite(y)) continue;
      total += std::abs(y - design_.link().inverse(eta[t]));
      ++n;
    }
  }
  return n > 0 ? total / static_cast<double>(n) : 0.0;
}

Eigen::VectorXd GaussianRegressionModel::initial_point(Rng& rng) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim());
  design_.fill_initial(x);
  x[off_log_sigma_] = std::log(0.6744897501960817 * sigma_prior_scale_);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd base = x;
  double jitter = 0.05;
  for (int attempt = 0; attempt < 21; ++attempt) {
    Eigen::VectorXd trial = base;
    if (jitter > 0.0) {
      for (int i = 0; i < trial.size(); ++i) trial[i] += jitter * normal(rng);
    }
    if (std::isfinite(log_density(trial, nullptr))) return trial;
    jitter = attempt >= 19 ? 0.0 : jitter * 0.5;
  }
  throw std::runtime_error("failed to find a finite starting point");
}

}  // namespace epirenew

#include "epirenew/priors.hpp"

#include <cmath>
#include <stdexcept>

namespace epirenew {

CholeskyCpc::CholeskyCpc(int dim, const double* y) : dim_(dim) {
  if (dim < 1) throw std::invalid_argument("correlation dimension must be >= 1");
  z_.resize(static_cast<std::size_t>(packed_size(dim)));
  chol_ = Eigen::MatrixXd::Zero(dim, dim);
  partial_ = Eigen::MatrixXd::Zero(dim, dim);
  chol_(0, 0) = 1.0;
  partial_(0, 0) = 1.0;
  int idx = 0;
  for (int i = 1; i < dim; ++i) {
    double w = 1.0;
    for (int j = 0; j < i; ++j, ++idx) {
      double z = std::tanh(y[idx]);
      z_[static_cast<std::size_t>(idx)] = z;
      partial_(i, j) = w;
      chol_(i, j) = z * w;
      w *= std::sqrt(1.0 - z * z);
    }
    partial_(i, i) = w;
    chol_(i, i) = w;
  }
}

double CholeskyCpc::log_prior(double eta, double* grad_y) const {
  if (!(eta > 0.0)) throw std::invalid_argument("correlation prior shape must be > 0");
  // Density in z for column j (0-based): (1 - z^2)^(eta - 1 + (dim - 2 - j)/2),
  // plus one power of (1 - z^2) from the tanh Jacobian. Constant terms that
  // depend only on (dim, eta) are dropped.
  double lp = 0.0;
  int idx = 0;
  for (int i = 1; i < dim_; ++i) {
    for (int j = 0; j < i; ++j, ++idx) {
      double z = z_[static_cast<std::size_t>(idx)];
      double expo = eta + 0.5 * static_cast<double>(dim_ - 2 - j);
      lp += expo * std::log1p(-z * z);
      if (grad_y != nullptr) grad_y[idx] += -2.0 * z * expo;
    }
  }
  return lp;
}

void CholeskyCpc::backprop_cholesky(const Eigen::MatrixXd& chol_bar, double* grad_y) const {
  int idx = 0;
  for (int i = 1; i < dim_; ++i) {
    // suffix(j) = sum_{j' >= j} chol_bar(i,j') * chol_(i,j'); entries at and
    // beyond column j share the log-derivative -z_ij / (1 - z_ij^2).
    double suffix = chol_bar(i, i) * chol_(i, i);
    std::vector<double> suffix_from(static_cast<std::size_t>(i + 1));
    suffix_from[static_cast<std::size_t>(i)] = suffix;
    for (int j = i - 1; j >= 0; --j) {
      suffix += chol_bar(i, j) * chol_(i, j);
      suffix_from[static_cast<std::size_t>(j)] = suffix;
    }
    for (int j = 0; j < i; ++j, ++idx) {
      double z = z_[static_cast<std::size_t>(idx)];
      // dL(i,j)/dz = partial(i,j); dL(i,j')/dz = -L(i,j') z / (1-z^2) for
      // j' > j. The tanh Jacobian dz/dy = 1 - z^2 cancels the division.
      grad_y[idx] += chol_bar(i, j) * partial_(i, j) * (1.0 - z * z) -
                     z * suffix_from[static_cast<std::size_t>(j + 1)];
    }
  }
}

HorseshoeBlock::HorseshoeBlock(int n, const double* z, const double* log_lambda,
                               double log_tau, const HorseshoeConfig& config)
    : n_(n), config_(config) {
  if (n < 1) throw std::invalid_argument("shrinkage block needs at least one coefficient");
  z_.assign(z, z + n);
  lambda_.resize(static_cast<std::size_t>(n));
  ltilde_.resize(static_cast<std::size_t>(n));
  beta_.resize(static_cast<std::size_t>(n));
  tau_ = std::exp(log_tau);
  const double c = config_.slab_scale;
  for (int j = 0; j < n; ++j) {
    double lam = std::exp(log_lambda[j]);
    lambda_[static_cast<std::size_t>(j)] = lam;
    double s = std::sqrt(c * c + tau_ * tau_ * lam * lam);
    ltilde_[static_cast<std::size_t>(j)] = c * lam / s;
    beta_[static_cast<std::size_t>(j)] =
        z_[static_cast<std::size_t>(j)] * tau_ * ltilde_[static_cast<std::size_t>(j)];
  }
}

double HorseshoeBlock::log_prior(double* grad_z, double* grad_log_lambda,
                                 double* grad_log_tau) const {
  double lp = 0.0;
  for (int j = 0; j < n_; ++j) {
    lp += normal_log_pdf(z_[static_cast<std::size_t>(j)], 0.0, 1.0,
                         grad_z != nullptr ? grad_z + j : nullptr);
    lp += half_cauchy_log_prior(std::log(lambda_[static_cast<std::size_t>(j)]), 1.0,
                                grad_log_lambda != nullptr ? grad_log_lambda + j : nullptr);
  }
  lp += half_cauchy_log_prior(std::log(tau_), config_.global_scale, grad_log_tau);
  return lp;
}

void HorseshoeBlock::backprop(const double* beta_bar, double* grad_z,
                              double* grad_log_lambda, double* grad_log_tau) const {
  const double c = config_.slab_scale;
  for (int j = 0; j < n_; ++j) {
    double lam = lambda_[static_cast<std::size_t>(j)];
    double lt = ltilde_[static_cast<std::size_t>(j)];
    double z = z_[static_cast<std::size_t>(j)];
    double s2 = c * c + tau_ * tau_ * lam * lam;
    double s3 = s2 * std::sqrt(s2);
    double c3 = c * c * c;
    double bb = beta_bar[j];
    grad_z[j] += bb * tau_ * lt;
    // d beta / d lambda = z tau c^3 / s^3; chain through lambda = exp(.)
    grad_log_lambda[j] += bb * z * tau_ * (c3 / s3) * lam;
    // d beta / d tau = z c^3 lambda / s^3; chain through tau = exp(.)
    *grad_log_tau += bb * z * (c3 * lam / s3) * tau_;
  }
}

}  // namespace epirenew

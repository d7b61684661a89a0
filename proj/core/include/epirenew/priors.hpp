#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "epirenew/math_utils.hpp"

namespace epirenew {

/// log N(x | mu, sd); accumulates d/dx into *grad_x when given.
inline double normal_log_pdf(double x, double mu, double sd, double* grad_x = nullptr) {
  double z = (x - mu) / sd;
  if (grad_x != nullptr) *grad_x += -z / sd;
  return -0.5 * kLogTwoPi - std::log(sd) - 0.5 * z * z;
}

/// Half-normal prior on s = exp(u), expressed in the unconstrained
/// coordinate u with the log |ds/du| = u Jacobian included.
inline double half_normal_log_prior(double u, double scale, double* grad_u = nullptr) {
  double s = std::exp(u);
  double z = s / scale;
  if (grad_u != nullptr) *grad_u += 1.0 - z * z;
  return 0.5 * std::log(2.0) - 0.5 * kLogTwoPi - std::log(scale) - 0.5 * z * z + u;
}

/// Half-Cauchy prior on s = exp(u) with the Jacobian included.
inline double half_cauchy_log_prior(double u, double scale, double* grad_u = nullptr) {
  double s = std::exp(u);
  double z2 = square(s / scale);
  if (grad_u != nullptr) *grad_u += 1.0 - 2.0 * z2 / (1.0 + z2);
  return std::log(2.0 / M_PI) - std::log(scale) - std::log1p(z2) + u;
}

/// Correlation matrix through canonical partial correlations.
///
/// Unconstrained y maps elementwise to z = tanh(y); the lower-triangular
/// Cholesky factor L is built row by row so that C = L L' is a valid
/// correlation matrix for every y. The prior weights each z in column j
/// (1-based) by (1 - z^2)^(eta - 1 + (dim - 1 - j)/2), which makes C
/// uniform over correlation matrices at eta = 1.
class CholeskyCpc {
 public:
  /// y holds the strict lower triangle in row-major order:
  /// (1,0), (2,0), (2,1), (3,0), ...
  CholeskyCpc(int dim, const double* y);

  static int packed_size(int dim) { return dim * (dim - 1) / 2; }

  int dim() const { return dim_; }
  const Eigen::MatrixXd& cholesky() const { return chol_; }
  Eigen::MatrixXd correlation() const { return chol_ * chol_.transpose(); }

  /// Log prior density in the unconstrained coordinates (tanh Jacobian
  /// included); accumulates d/dy into grad_y when given.
  double log_prior(double eta, double* grad_y = nullptr) const;

  /// Pulls an adjoint on L back to the unconstrained y coordinates,
  /// accumulating into grad_y.
  void backprop_cholesky(const Eigen::MatrixXd& chol_bar, double* grad_y) const;

 private:
  int dim_;
  std::vector<double> z_;        // tanh(y), packed like y
  Eigen::MatrixXd chol_;
  Eigen::MatrixXd partial_;      // partial_(i,j): prod_{k<j} sqrt(1 - z_ik^2)
};

/// Regularized hierarchical-shrinkage coefficients.
///
/// beta_j = z_j * tau * ltilde_j with ltilde_j^2 = c^2 lambda_j^2 /
/// (c^2 + tau^2 lambda_j^2): half-Cauchy local scales lambda_j, a
/// half-Cauchy global scale tau, and a slab that caps large coefficients
/// at scale c.
struct HorseshoeConfig {
  double global_scale = 1.0;  // scale of the half-Cauchy prior on tau
  double slab_scale = 2.5;    // c
};

class HorseshoeBlock {
 public:
  /// z: n coefficients; log_lambda: n local log-scales; log_tau: global.
  HorseshoeBlock(int n, const double* z, const double* log_lambda, double log_tau,
                 const HorseshoeConfig& config);

  const std::vector<double>& coefficients() const { return beta_; }

  /// Priors on z (standard normal), lambda, tau (half-Cauchy, Jacobians
  /// included); accumulates gradients.
  double log_prior(double* grad_z, double* grad_log_lambda, double* grad_log_tau) const;

  /// Pulls coefficient adjoints back to (z, log_lambda, log_tau).
  void backprop(const double* beta_bar, double* grad_z, double* grad_log_lambda,
                double* grad_log_tau) const;

 private:
  int n_;
  HorseshoeConfig config_;
  std::vector<double> z_;
  std::vector<double> lambda_;
  double tau_;
  std::vector<double> ltilde_;
  std::vector<double> beta_;
};

}  // namespace epirenew

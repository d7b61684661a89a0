#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "epirenew/layout.hpp"
#include "epirenew/link.hpp"
#include "epirenew/priors.hpp"

namespace epirenew {

/// fixed: one shared coefficient; grouped: per-region zero-mean deviations
/// only; fixed_and_grouped: shared coefficient plus per-region deviations
/// drawn from a common covariance.
enum class PoolingMode { fixed, grouped, fixed_and_grouped };

enum class CoefficientPrior { normal, shrinkage };

struct CovariateTerm {
  std::string name;
  PoolingMode pooling = PoolingMode::fixed;
  CoefficientPrior prior = CoefficientPrior::normal;
  double prior_sd = 0.5;  // normal prior sd on the shared coefficient
};

enum class WalkTimescale { daily, weekly };

/// Random-walk trend on the linear predictor, non-centered: bucket value
/// b equals scale * cumsum(raw)[b], one raw increment per bucket.
struct RandomWalkTerm {
  WalkTimescale timescale = WalkTimescale::weekly;
  bool per_group = true;          // separate walk per region, shared scale
  double scale_prior_sd = 0.2;    // half-normal prior on the walk scale
};

struct DesignSpec {
  LinkFunction link = LinkFunction::log_link();
  bool intercept = true;
  PoolingMode intercept_pooling = PoolingMode::fixed;
  double intercept_prior_mean = 0.0;
  double intercept_prior_sd = 1.0;
  std::vector<CovariateTerm> terms;
  std::optional<RandomWalkTerm> walk;
  double pooled_sd_prior_scale = 0.5;  // half-normal on each deviation scale
  double lkj_eta = 1.0;                // correlation prior shape
  HorseshoeConfig horseshoe;
  bool standardize_continuous = true;
};

struct RegionCovariates {
  std::string region;
  int horizon = 0;
  std::map<std::string, std::vector<double>> columns;
};

struct ColumnStats {
  std::string name;
  bool standardized = false;
  double center = 0.0;
  double scale = 1.0;
};

/// Compiled regression design over a set of regions: per-region matrices,
/// a deterministic parameter layout, and gradient plumbing. The linear
/// predictor for region m is
///   eta_m = X_m (beta_fixed + delta_m) + walk_m,
/// with delta_m = diag(tau) L z_m for pooled terms (L a correlation
/// Cholesky factor) and shrinkage coefficients assembled from their
/// auxiliary scales.
class Design {
 public:
  Design(DesignSpec spec, const std::vector<RegionCovariates>& data);

  /// Adds this design's parameter blocks to `layout` under `prefix`.
  /// Must be called exactly once before evaluation.
  void register_blocks(ParameterLayout& layout, const std::string& prefix);

  const DesignSpec& spec() const { return spec_; }
  const LinkFunction& link() const { return spec_.link; }
  int n_regions() const { return static_cast<int>(x_.size()); }
  int horizon(int region) const { return static_cast<int>(x_[static_cast<std::size_t>(region)].rows()); }
  int n_columns() const { return p_; }
  int n_grouped() const { return q_; }
  int n_params() const { return n_params_; }
  const std::vector<ColumnStats>& column_stats() const { return column_stats_; }
  const Eigen::MatrixXd& matrix(int region) const { return x_[static_cast<std::size_t>(region)]; }

  Eigen::VectorXd linear_predictor(const Eigen::VectorXd& params, int region) const;

  /// invlink applied to the linear predictor.
  std::vector<double> rates(const Eigen::VectorXd& params, int region) const;

  /// Log prior over this design's blocks; accumulates into grad when given.
  double log_prior(const Eigen::VectorXd& params, Eigen::VectorXd* grad) const;

  /// Pulls an adjoint on the linear predictor (one entry per day) back to
  /// this design's parameters, accumulating into grad.
  void backprop_linear_predictor(const Eigen::VectorXd& params, int region,
                                 const Eigen::VectorXd& linpred_bar,
                                 Eigen::VectorXd& grad) const;

  /// Shared (fixed) coefficient for a named column, on the standardized
  /// scale the design matrix uses.
  double fixed_coefficient(const Eigen::VectorXd& params, const std::string& column) const;

  /// Region deviation for a named grouped column.
  double group_deviation(const Eigen::VectorXd& params, const std::string& column,
                         int region) const;

  std::vector<double> walk_values(const Eigen::VectorXd& params, int region) const;

  /// Number of walk buckets for a region (0 without a walk term).
  int walk_buckets(int region) const;

  /// Writes prior-median defaults into this design's slice of `params`.
  void fill_initial(Eigen::VectorXd& params) const;

  /// Column names in design order (intercept first when present).
  const std::vector<std::string>& column_names() const { return column_names_; }

 private:
  struct Assembled;
  Assembled assemble(const Eigen::VectorXd& params) const;
  int column_index(const std::string& name) const;

  DesignSpec spec_;
  std::vector<std::string> region_names_;
  std::vector<Eigen::MatrixXd> x_;
  std::vector<ColumnStats> column_stats_;
  std::vector<std::string> column_names_;

  int p_ = 0;  // design columns
  int q_ = 0;  // grouped columns
  std::vector<int> fixed_param_of_col_;    // index into coef params, -1 if none
  std::vector<int> shrink_index_of_col_;   // index into shrinkage block, -1 if none
  std::vector<int> grouped_index_of_col_;  // index into grouped dims, -1 if none
  std::vector<double> coef_prior_mean_;    // per fixed coef param (normal prior only)
  std::vector<double> coef_prior_sd_;
  std::vector<bool> coef_is_shrinkage_;
  int n_coef_ = 0;
  int n_shrink_ = 0;

  std::vector<std::vector<int>> bucket_of_day_;  // per region
  std::vector<int> n_buckets_;                   // per region
  std::vector<int> walk_offset_;                 // into walk_z, per region
  int total_walk_ = 0;

  bool registered_ = false;
  int n_params_ = 0;
  int off_coef_ = -1;
  int off_hs_log_lambda_ = -1;
  int off_hs_log_tau_ = -1;
  int off_pool_log_tau_ = -1;
  int off_pool_corr_ = -1;
  int off_pool_z_ = -1;
  int off_walk_log_scale_ = -1;
  int off_walk_z_ = -1;
};

}  // namespace epirenew

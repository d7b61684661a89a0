#include "epirenew/design.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace epirenew {

namespace {

bool is_binary_column(const std::vector<const std::vector<double>*>& columns) {
  for (const auto* col : columns) {
    for (double v : *col) {
      if (v != 0.0 && v != 1.0) return false;
    }
  }
  return true;
}

}  // namespace

struct Design::Assembled {
  Eigen::VectorXd fixed_expanded;
  std::vector<double> shrink_z;  // gathered shrinkage raw coefficients
  std::optional<HorseshoeBlock> hs;
  std::vector<double> tau;
  std::optional<CholeskyCpc> cpc;
  Eigen::MatrixXd u;      // n_regions x q, L z_m before tau scaling
  Eigen::MatrixXd delta;  // n_regions x p, expanded deviations
  double walk_scale = 0.0;
};

Design::Design(DesignSpec spec, const std::vector<RegionCovariates>& data)
    : spec_(std::move(spec)) {
  if (data.empty()) throw std::invalid_argument("design needs at least one region");
  const int n_regions = static_cast<int>(data.size());

  if (spec_.intercept) column_names_.push_back("intercept");
  for (const auto& term : spec_.terms) {
    if (term.name == "intercept") throw std::invalid_argument("'intercept' is reserved");
    if (std::count(column_names_.begin(), column_names_.end(), term.name) > 0) {
      throw std::invalid_argument("duplicate covariate term: " + term.name);
    }
    if (term.pooling == PoolingMode::grouped && term.prior == CoefficientPrior::shrinkage) {
      throw std::invalid_argument("shrinkage prior needs a shared coefficient: " + term.name);
    }
    column_names_.push_back(term.name);
  }
  p_ = static_cast<int>(column_names_.size());

  for (const auto& region : data) {
    region_names_.push_back(region.region);
    if (region.horizon < 1) throw std::invalid_argument("region horizon must be >= 1");
    for (const auto& term : spec_.terms) {
      auto it = region.columns.find(term.name);
      if (it == region.columns.end()) {
        throw std::invalid_argument("region " + region.region + " missing covariate " +
                                    term.name);
      }
      if (static_cast<int>(it->second.size()) != region.horizon) {
        throw std::invalid_argument("covariate " + term.name + " length mismatch in region " +
                                    region.region);
      }
      for (double v : it->second) {
        if (!std::isfinite(v)) {
          throw std::invalid_argument("non-finite covariate value in " + term.name);
        }
      }
    }
  }

  // Standardization statistics are pooled across regions so coefficients
  // stay comparable between groups.
  column_stats_.resize(static_cast<std::size_t>(p_));
  int col = 0;
  if (spec_.intercept) {
    column_stats_[0].name = "intercept";
    col = 1;
  }
  for (const auto& term : spec_.terms) {
    ColumnStats& stats = column_stats_[static_cast<std::size_t>(col)];
    stats.name = term.name;
    std::vector<const std::vector<double>*> columns;
    for (const auto& region : data) columns.push_back(&region.columns.at(term.name));
    if (spec_.standardize_continuous && !is_binary_column(columns)) {
      double sum = 0.0;
      double count = 0.0;
      for (const auto* c : columns) {
        for (double v : *c) {
          sum += v;
          count += 1.0;
        }
      }
      double mean = sum / count;
      double ss = 0.0;
      for (const auto* c : columns) {
        for (double v : *c) ss += square(v - mean);
      }
      double sd = count > 1.0 ? std::sqrt(ss / (count - 1.0)) : 0.0;
      stats.standardized = true;
      stats.center = mean;
      stats.scale = sd > 0.0 ? sd : 1.0;
    }
    ++col;
  }

  for (int m = 0; m < n_regions; ++m) {
    const auto& region = data[static_cast<std::size_t>(m)];
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(region.horizon, p_);
    int c = 0;
    if (spec_.intercept) {
      x.col(0).setOnes();
      c = 1;
    }
    for (const auto& term : spec_.terms) {
      const auto& raw = region.columns.at(term.name);
      const ColumnStats& stats = column_stats_[static_cast<std::size_t>(c)];
      for (int t = 0; t < region.horizon; ++t) {
        double v = raw[static_cast<std::size_t>(t)];
        if (stats.standardized) v = (v - stats.center) / stats.scale;
        x(t, c) = v;
      }
      ++c;
    }
    x_.push_back(std::move(x));
  }

  fixed_param_of_col_.assign(static_cast<std::size_t>(p_), -1);
  shrink_index_of_col_.assign(static_cast<std::size_t>(p_), -1);
  grouped_index_of_col_.assign(static_cast<std::size_t>(p_), -1);
  auto classify = [&](int column, PoolingMode pooling, CoefficientPrior prior,
                      double prior_mean, double prior_sd) {
    if (pooling != PoolingMode::grouped) {
      fixed_param_of_col_[static_cast<std::size_t>(column)] = n_coef_;
      coef_is_shrinkage_.push_back(prior == CoefficientPrior::shrinkage);
      if (prior == CoefficientPrior::shrinkage) {
        shrink_index_of_col_[static_cast<std::size_t>(column)] = n_shrink_++;
        coef_prior_mean_.push_back(0.0);
        coef_prior_sd_.push_back(1.0);
      } else {
        coef_prior_mean_.push_back(prior_mean);
        coef_prior_sd_.push_back(prior_sd);
      }
      ++n_coef_;
    }
    if (pooling != PoolingMode::fixed) {
      grouped_index_of_col_[static_cast<std::size_t>(column)] = q_++;
    }
  };
  col = 0;
  if (spec_.intercept) {
    classify(0, spec_.intercept_pooling, CoefficientPrior::normal, spec_.intercept_prior_mean,
             spec_.intercept_prior_sd);
    col = 1;
  }
  for (const auto& term : spec_.terms) {
    if (!(term.prior_sd > 0.0)) throw std::invalid_argument("prior sd must be > 0");
    classify(col, term.pooling, term.prior, 0.0, term.prior_sd);
    ++col;
  }

  if (spec_.walk.has_value()) {
    for (int m = 0; m < n_regions; ++m) {
      const int horizon = static_cast<int>(x_[static_cast<std::size_t>(m)].rows());
      std::vector<int> buckets(static_cast<std::size_t>(horizon));
      for (int t = 1; t <= horizon; ++t) {
        buckets[static_cast<std::size_t>(t - 1)] =
            spec_.walk->timescale == WalkTimescale::daily ? t - 1 : (t - 1) / 7;
      }
      bucket_of_day_.push_back(std::move(buckets));
      n_buckets_.push_back(bucket_of_day_.back().back() + 1);
    }
    walk_offset_.assign(static_cast<std::size_t>(n_regions), 0);
    if (spec_.walk->per_group) {
      int off = 0;
      for (int m = 0; m < n_regions; ++m) {
        walk_offset_[static_cast<std::size_t>(m)] = off;
        off += n_buckets_[static_cast<std::size_t>(m)];
      }
      total_walk_ = off;
    } else {
      total_walk_ = *std::max_element(n_buckets_.begin(), n_buckets_.end());
    }
  }
}

void Design::register_blocks(ParameterLayout& layout, const std::string& prefix) {
  if (registered_) throw std::logic_error("design blocks already registered");
  registered_ = true;
  const int base = layout.size();
  int coef = 0;
  for (int c = 0; c < p_; ++c) {
    int idx = fixed_param_of_col_[static_cast<std::size_t>(c)];
    if (idx < 0) continue;
    const std::string& name = column_names_[static_cast<std::size_t>(c)];
    bool shrink = coef_is_shrinkage_[static_cast<std::size_t>(idx)];
    int off = layout.add(prefix + (shrink ? "bz[" : "b[") + name + "]", 1);
    if (coef == 0) off_coef_ = off;
    ++coef;
  }
  if (n_shrink_ > 0) {
    off_hs_log_lambda_ = layout.add(prefix + "hs_log_lambda", n_shrink_);
    off_hs_log_tau_ = layout.add(prefix + "hs_log_tau", 1);
  }
  if (q_ > 0) {
    off_pool_log_tau_ = layout.add(prefix + "pool_log_tau", q_);
    if (q_ >= 2) off_pool_corr_ = layout.add(prefix + "pool_corr", q_ * (q_ - 1) / 2);
    off_pool_z_ = layout.add(prefix + "pool_z", n_regions() * q_);
  }
  if (spec_.walk.has_value()) {
    off_walk_log_scale_ = layout.add(prefix + "walk_log_scale", 1);
    off_walk_z_ = layout.add(prefix + "walk_z", total_walk_);
  }
  n_params_ = layout.size() - base;
}

int Design::column_index(const std::string& name) const {
  for (int c = 0; c < p_; ++c) {
    if (column_names_[static_cast<std::size_t>(c)] == name) return c;
  }
  throw std::out_of_range("no design column named " + name);
}

Design::Assembled Design::assemble(const Eigen::VectorXd& params) const {
  if (!registered_) throw std::logic_error("design blocks not registered");
  Assembled a;
  a.fixed_expanded = Eigen::VectorXd::Zero(p_);
  if (n_shrink_ > 0) {
    a.shrink_z.resize(static_cast<std::size_t>(n_shrink_));
    for (int c = 0; c < p_; ++c) {
      int idx = fixed_param_of_col_[static_cast<std::size_t>(c)];
      int sidx = shrink_index_of_col_[static_cast<std::size_t>(c)];
      if (idx >= 0 && sidx >= 0) {
        a.shrink_z[static_cast<std::size_t>(sidx)] = params[off_coef_ + idx];
      }
    }
    a.hs.emplace(n_shrink_, a.shrink_z.data(), params.data() + off_hs_log_lambda_,
                 params[off_hs_log_tau_], spec_.horseshoe);
  }
  for (int c = 0; c < p_; ++c) {
    int idx = fixed_param_of_col_[static_cast<std::size_t>(c)];
    if (idx < 0) continue;
    int sidx = shrink_index_of_col_[static_cast<std::size_t>(c)];
    a.fixed_expanded[c] = sidx >= 0 ? a.hs->coefficients()[static_cast<std::size_t>(sidx)]
                                    : params[off_coef_ + idx];
  }
  const int n_reg = n_regions();
  a.delta = Eigen::MatrixXd::Zero(n_reg, p_);
  if (q_ > 0) {
    a.tau.resize(static_cast<std::size_t>(q_));
    for (int j = 0; j < q_; ++j) a.tau[static_cast<std::size_t>(j)] = std::exp(params[off_pool_log_tau_ + j]);
    if (q_ >= 2) a.cpc.emplace(q_, params.data() + off_pool_corr_);
    a.u = Eigen::MatrixXd::Zero(n_reg, q_);
    for (int m = 0; m < n_reg; ++m) {
      Eigen::VectorXd z(q_);
      for (int j = 0; j < q_; ++j) z[j] = params[off_pool_z_ + m * q_ + j];
      Eigen::VectorXd u = q_ >= 2 ? Eigen::VectorXd(a.cpc->cholesky() * z) : z;
      a.u.row(m) = u.transpose();
      for (int c = 0; c < p_; ++c) {
        int j = grouped_index_of_col_[static_cast<std::size_t>(c)];
        if (j >= 0) a.delta(m, c) = a.tau[static_cast<std::size_t>(j)] * u[j];
      }
    }
  }
  if (spec_.walk.has_value()) a.walk_scale = std::exp(params[off_walk_log_scale_]);
  return a;
}

Eigen::VectorXd Design::linear_predictor(const Eigen::VectorXd& params, int region) const {
  Assembled a = assemble(params);
  const Eigen::MatrixXd& x = x_[static_cast<std::size_t>(region)];
  Eigen::VectorXd coeff = a.fixed_expanded + a.delta.row(region).transpose();
  Eigen::VectorXd eta = x * coeff;
  if (spec_.walk.has_value()) {
    const auto& buckets = bucket_of_day_[static_cast<std::size_t>(region)];
    int nb = n_buckets_[static_cast<std::size_t>(region)];
    int off = off_walk_z_ + walk_offset_[static_cast<std::size_t>(region)];
    std::vector<double> walk(static_cast<std::size_t>(nb));
    double acc = 0.0;
    for (int b = 0; b < nb; ++b) {
      acc += params[off + b];
      walk[static_cast<std::size_t>(b)] = a.walk_scale * acc;
    }
    for (int t = 0; t < eta.size(); ++t) {
      eta[t] += walk[static_cast<std::size_t>(buckets[static_cast<std::size_t>(t)])];
    }
  }
  return eta;
}

std::vector<double> Design::rates(const Eigen::VectorXd& params, int region) const {
  Eigen::VectorXd eta = linear_predictor(params, region);
  std::vector<double> out(static_cast<std::size_t>(eta.size()));
  for (int t = 0; t < eta.size(); ++t) out[static_cast<std::size_t>(t)] = spec_.link.inverse(eta[t]);
  return out;
}

double Design::log_prior(const Eigen::VectorXd& params, Eigen::VectorXd* grad) const {
  if (!registered_) throw std::logic_error("design blocks not registered");
  double lp = 0.0;
  for (int idx = 0; idx < n_coef_; ++idx) {
    if (coef_is_shrinkage_[static_cast<std::size_t>(idx)]) continue;
    double* g = grad != nullptr ? grad->data() + off_coef_ + idx : nullptr;
    lp += normal_log_pdf(params[off_coef_ + idx], coef_prior_mean_[static_cast<std::size_t>(idx)],
                         coef_prior_sd_[static_cast<std::size_t>(idx)], g);
  }
  if (n_shrink_ > 0) {
    Assembled a = assemble(params);
    std::vector<double> gz(static_cast<std::size_t>(n_shrink_), 0.0);
    std::vector<double> gl(static_cast<std::size_t>(n_shrink_), 0.0);
    double gt = 0.0;
    lp += a.hs->log_prior(gz.data(), gl.data(), &gt);
    if (grad != nullptr) {
      for (int c = 0; c < p_; ++c) {
        int idx = fixed_param_of_col_[static_cast<std::size_t>(c)];
        int sidx = shrink_index_of_col_[static_cast<std::size_t>(c)];
        if (idx >= 0 && sidx >= 0) {
          (*grad)[off_coef_ + idx] += gz[static_cast<std::size_t>(sidx)];
        }
      }
      for (int j = 0; j < n_shrink_; ++j) {
        (*grad)[off_hs_log_lambda_ + j] += gl[static_cast<std::size_t>(j)];
      }
      (*grad)[off_hs_log_tau_] += gt;
    }
  }
  if (q_ > 0) {
    for (int j = 0; j < q_; ++j) {
      double* g = grad != nullptr ? grad->data() + off_pool_log_tau_ + j : nullptr;
      lp += half_normal_log_prior(params[off_pool_log_tau_ + j], spec_.pooled_sd_prior_scale, g);
    }
    if (q_ >= 2) {
      CholeskyCpc cpc(q_, params.data() + off_pool_corr_);
      double* g = grad != nullptr ? grad->data() + off_pool_corr_ : nullptr;
      lp += cpc.log_prior(spec_.lkj_eta, g);
    }
    for (int k = 0; k < n_regions() * q_; ++k) {
      double* g = grad != nullptr ? grad->data() + off_pool_z_ + k : nullptr;
      lp += normal_log_pdf(params[off_pool_z_ + k], 0.0, 1.0, g);
    }
  }
  if (spec_.walk.has_value()) {
    double* g = grad != nullptr ? grad->data() + off_walk_log_scale_ : nullptr;
    lp += half_normal_log_prior(params[off_walk_log_scale_], spec_.walk->scale_prior_sd, g);
    for (int k = 0; k < total_walk_; ++k) {
      double* gz = grad != nullptr ? grad->data() + off_walk_z_ + k : nullptr;
      lp += normal_log_pdf(params[off_walk_z_ + k], 0.0, 1.0, gz);
    }
  }
  return lp;
}

void Design::backprop_linear_predictor(const Eigen::VectorXd& params, int region,
                                       const Eigen::VectorXd& linpred_bar,
                                       Eigen::VectorXd& grad) const {
  Assembled a = assemble(params);
  const Eigen::MatrixXd& x = x_[static_cast<std::size_t>(region)];
  Eigen::VectorXd vbar = x.transpose() * linpred_bar;

  std::vector<double> beta_bar;
  if (n_shrink_ > 0) beta_bar.assign(static_cast<std::size_t>(n_shrink_), 0.0);
  for (int c = 0; c < p_; ++c) {
    int idx = fixed_param_of_col_[static_cast<std::size_t>(c)];
    if (idx < 0) continue;
    int sidx = shrink_index_of_col_[static_cast<std::size_t>(c)];
    if (sidx >= 0) {
      beta_bar[static_cast<std::size_t>(sidx)] += vbar[c];
    } else {
      grad[off_coef_ + idx] += vbar[c];
    }
  }
  if (n_shrink_ > 0) {
    std::vector<double> gz(static_cast<std::size_t>(n_shrink_), 0.0);
    std::vector<double> gl(static_cast<std::size_t>(n_shrink_), 0.0);
    double gt = 0.0;
    a.hs->backprop(beta_bar.data(), gz.data(), gl.data(), &gt);
    for (int c = 0; c < p_; ++c) {
      int idx = fixed_param_of_col_[static_cast<std::size_t>(c)];
      int sidx = shrink_index_of_col_[static_cast<std::size_t>(c)];
      if (idx >= 0 && sidx >= 0) grad[off_coef_ + idx] += gz[static_cast<std::size_t>(sidx)];
    }
    for (int j = 0; j < n_shrink_; ++j) grad[off_hs_log_lambda_ + j] += gl[static_cast<std::size_t>(j)];
    grad[off_hs_log_tau_] += gt;
  }

  if (q_ > 0) {
    Eigen::VectorXd delta_bar = Eigen::VectorXd::Zero(q_);
    for (int c = 0; c < p_; ++c) {
      int j = grouped_index_of_col_[static_cast<std::size_t>(c)];
      if (j >= 0) delta_bar[j] = vbar[c];
    }
    Eigen::VectorXd ubar(q_);
    for (int j = 0; j < q_; ++j) {
      ubar[j] = a.tau[static_cast<std::size_t>(j)] * delta_bar[j];
      // delta_j = tau_j u_j; chain through tau_j = exp(.)
      grad[off_pool_log_tau_ + j] +=
          delta_bar[j] * a.u(region, j) * a.tau[static_cast<std::size_t>(j)];
    }
    Eigen::VectorXd z(q_);
    for (int j = 0; j < q_; ++j) z[j] = params[off_pool_z_ + region * q_ + j];
    if (q_ >= 2) {
      Eigen::VectorXd zbar = a.cpc->cholesky().transpose() * ubar;
      for (int j = 0; j < q_; ++j) grad[off_pool_z_ + region * q_ + j] += zbar[j];
      Eigen::MatrixXd chol_bar = ubar * z.transpose();
      // only the lower triangle of L is live
      for (int i = 0; i < q_; ++i) {
        for (int j = i + 1; j < q_; ++j) chol_bar(i, j) = 0.0;
      }
      a.cpc->backprop_cholesky(chol_bar, grad.data() + off_pool_corr_);
    } else {
      grad[off_pool_z_ + region] += ubar[0];
    }
  }

  if (spec_.walk.has_value()) {
    const auto& buckets = bucket_of_day_[static_cast<std::size_t>(region)];
    int nb = n_buckets_[static_cast<std::size_t>(region)];
    int off = off_walk_z_ + walk_offset_[static_cast<std::size_t>(region)];
    std::vector<double> bucket_bar(static_cast<std::size_t>(nb), 0.0);
    for (int t = 0; t < linpred_bar.size(); ++t) {
      bucket_bar[static_cast<std::size_t>(buckets[static_cast<std::size_t>(t)])] += linpred_bar[t];
    }
    double cum_z = 0.0;
    double scale_bar = 0.0;
    for (int b = 0; b < nb; ++b) {
      cum_z += params[off + b];
      scale_bar += bucket_bar[static_cast<std::size_t>(b)] * cum_z;
    }
    grad[off_walk_log_scale_] += scale_bar * a.walk_scale;
    double suffix = 0.0;
    for (int b = nb - 1; b >= 0; --b) {
      suffix += bucket_bar[static_cast<std::size_t>(b)];
      grad[off + b] += a.walk_scale * suffix;
    }
  }
}

double Design::fixed_coefficient(const Eigen::VectorXd& params, const std::string& column) const {
  int c = column_index(column);
  int idx = fixed_param_of_col_[static_cast<std::size_t>(c)];
  if (idx < 0) throw std::invalid_argument(column + " has no shared coefficient");
  int sidx = shrink_index_of_col_[static_cast<std::size_t>(c)];
  if (sidx < 0) return params[off_coef_ + idx];
  Assembled a = assemble(params);
  return a.hs->coefficients()[static_cast<std::size_t>(sidx)];
}

double Design::group_deviation(const Eigen::VectorXd& params, const std::string& column,
                               int region) const {
  int c = column_index(column);
  if (grouped_index_of_col_[static_cast<std::size_t>(c)] < 0) {
    throw std::invalid_argument(column + " has no grouped deviations");
  }
  Assembled a = assemble(params);
  return a.delta(region, c);
}

std::vector<double> Design::walk_values(const Eigen::VectorXd& params, int region) const {
  if (!spec_.walk.has_value()) return {};
  int nb = n_buckets_[static_cast<std::size_t>(region)];
  int off = off_walk_z_ + walk_offset_[static_cast<std::size_t>(region)];
  double scale = std::exp(params[off_walk_log_scale_]);
  std::vector<double> out(static_cast<std::size_t>(nb));
  double acc = 0.0;
  for (int b = 0; b < nb; ++b) {
    acc += params[off + b];
    out[static_cast<std::size_t>(b)] = scale * acc;
  }
  return out;
}

int Design::walk_buckets(int region) const {
  if (!spec_.walk.has_value()) return 0;
  return n_buckets_[static_cast<std::size_t>(region)];
}

void Design::fill_initial(Eigen::VectorXd& params) const {
  if (!registered_) throw std::logic_error("design blocks not registered");
  // half-normal(s) has median ~0.6745 s; half-Cauchy(s) has median s
  constexpr double kHalfNormalMedian = 0.6744897501960817;
  for (int idx = 0; idx < n_coef_; ++idx) {
    params[off_coef_ + idx] = coef_is_shrinkage_[static_cast<std::size_t>(idx)]
                                  ? 0.0
                                  : coef_prior_mean_[static_cast<std::size_t>(idx)];
  }
  if (n_shrink_ > 0) {
    for (int j = 0; j < n_shrink_; ++j) params[off_hs_log_lambda_ + j] = 0.0;
    params[off_hs_log_tau_] = std::log(spec_.horseshoe.global_scale);
  }
  if (q_ > 0) {
    for (int j = 0; j < q_; ++j) {
      params[off_pool_log_tau_ + j] = std::log(kHalfNormalMedian * spec_.pooled_sd_prior_scale);
    }
    if (q_ >= 2) {
      for (int k = 0; k < q_ * (q_ - 1) / 2; ++k) params[off_pool_corr_ + k] = 0.0;
    }
    for (int k = 0; k < n_regions() * q_; ++k) params[off_pool_z_ + k] = 0.0;
  }
  if (spec_.walk.has_value()) {
    params[off_walk_log_scale_] = std::log(kHalfNormalMedian * spec_.walk->scale_prior_sd);
    for (int k = 0; k < total_walk_; ++k) params[off_walk_z_ + k] = 0.0;
  }
}

}  // namespace epirenew

#include "epirenew/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "epirenew/math_utils.hpp"

namespace epirenew {

namespace {

constexpr double kHalfNormalMedian = 0.6744897501960817;

std::vector<RegionCovariates> to_covariates(const std::vector<RegionData>& data) {
  std::vector<RegionCovariates> out;
  out.reserve(data.size());
  for (const auto& r : data) out.push_back({r.name, r.horizon, r.covariates});
  return out;
}

bool needs_phi(ObsFamily family) {
  return family == ObsFamily::neg_binomial || family == ObsFamily::quasi_poisson;
}

}  // namespace

RenewalModel::RenewalModel(ModelSpec spec, std::vector<RegionData> data)
    : spec_(std::move(spec)),
      data_(std::move(data)),
      transmission_(spec_.transmission, to_covariates(data_)) {
  if (data_.empty()) throw std::invalid_argument("model needs at least one region");
  if (spec_.generation.size() < 1 || spec_.generation.min_lag() < 1) {
    throw std::invalid_argument("generation pmf must be nonempty and start at lag >= 1");
  }
  for (const auto& obs : spec_.observations) {
    if (obs.delay.size() < 1) {
      throw std::invalid_argument("observation " + obs.name + " needs a delay pmf");
    }
  }
  if (spec_.observations.empty()) {
    throw std::invalid_argument("model needs at least one observation type");
  }
  if (!(spec_.seeding.level_prior_sd > 0.0)) {
    throw std::invalid_argument("seed level prior sd must be > 0");
  }
  if (spec_.fixed_dispersion.has_value() && !(*spec_.fixed_dispersion > 0.0)) {
    throw std::invalid_argument("fixed dispersion must be > 0");
  }
  const int n_obs = static_cast<int>(spec_.observations.size());
  std::set<std::string> region_names;
  for (const auto& region : data_) {
    if (!region_names.insert(region.name).second) {
      throw std::invalid_argument("duplicate region name: " + region.name);
    }
    if (region.horizon < 1) throw std::invalid_argument("region horizon must be >= 1");
    if (static_cast<int>(region.series.size()) != n_obs) {
      throw std::invalid_argument("region " + region.name +
                                  " must carry one series per observation type");
    }
    bool needs_population = spec_.population_adjustment;
    for (int k = 0; k < n_obs; ++k) {
      const auto& obs = spec_.observations[static_cast<std::size_t>(k)];
      const auto& series = region.series[static_cast<std::size_t>(k)];
      if (!series.type_name.empty() && series.type_name != obs.name) {
        throw std::invalid_argument("series order mismatch in region " + region.name +
                                    ": expected " + obs.name + ", got " + series.type_name);
      }
      if (static_cast<int>(series.counts.size()) != region.horizon) {
        throw std::invalid_argument("series " + obs.name + " length mismatch in region " +
                                    region.name);
      }
      if (!series.mask.empty() &&
          static_cast<int>(series.mask.size()) != region.horizon) {
        throw std::invalid_argument("mask length mismatch for " + obs.name);
      }
      for (long c : series.counts) {
        if (c < 0) throw std::invalid_argument("negative count in " + obs.name);
      }
      if (obs.family == ObsFamily::binomial) {
        needs_population = true;
        if (static_cast<int>(series.trials.size()) != region.horizon) {
          throw std::invalid_argument("binomial series " + obs.name +
                                      " needs per-day trial counts");
        }
        if (obs.ascertainment.has_value()) {
          throw std::invalid_argument(
              "binomial series use a constant ascertainment factor only");
        }
      } else {
        if (obs.constant_ascertainment.has_value() == obs.ascertainment.has_value()) {
          throw std::invalid_argument("observation " + obs.name +
                                      " needs exactly one of a constant ascertainment or "
                                      "an ascertainment design");
        }
        if (obs.constant_ascertainment.has_value() && !(*obs.constant_ascertainment > 0.0)) {
          throw std::invalid_argument("constant ascertainment must be > 0");
        }
      }
      if (obs.fixed_phi.has_value()) {
        if (obs.family == ObsFamily::neg_binomial && !(*obs.fixed_phi > 0.0)) {
          throw std::invalid_argument("neg_binomial phi must be > 0");
        }
        if (obs.family == ObsFamily::quasi_poisson && !(*obs.fixed_phi > 1.0)) {
          throw std::invalid_argument("quasi_poisson phi must be > 1");
        }
      }
    }
    if (needs_population && !(region.population > 0.0)) {
      throw std::invalid_argument("region " + region.name + " needs a positive population");
    }
  }

  transmission_.register_blocks(layout_, "R.");
  ascertainment_.resize(static_cast<std::size_t>(n_obs));
  off_phi_.assign(static_cast<std::size_t>(n_obs), -1);
  for (int k = 0; k < n_obs; ++k) {
    const auto& obs = spec_.observations[static_cast<std::size_t>(k)];
    if (obs.ascertainment.has_value()) {
      ascertainment_[static_cast<std::size_t>(k)].emplace(*obs.ascertainment,
                                                          to_covariates(data_));
      ascertainment_[static_cast<std::size_t>(k)]->register_blocks(
          layout_, "alpha[" + obs.name + "].");
    }
    if (needs_phi(obs.family) && !obs.fixed_phi.has_value()) {
      off_phi_[static_cast<std::size_t>(k)] = layout_.add("phi[" + obs.name + "]", 1);
    }
  }
  off_seed_level_ = layout_.add("seed_log_level", n_regions());
  if (spec_.seeding.daily_noise_sd > 0.0) {
    off_seed_noise_ = layout_.add("seed_noise", n_regions() * spec_.seeding.window);
  }
  if (spec_.mode == ModelMode::latent) {
    if (!spec_.fixed_dispersion.has_value()) off_log_d_ = layout_.add("log_d", 1);
    off_latent_.reserve(data_.size());
    for (const auto& region : data_) {
      off_latent_.push_back(layout_.add("latent[" + region.name + "]", region.horizon));
    }
  }

  for (const auto& region : data_) {
    for (const auto& series : region.series) {
      if (series.mask.empty()) {
        n_pointwise_ += region.horizon;
      } else {
        n_pointwise_ += static_cast<int>(std::count(series.mask.begin(), series.mask.end(), true));
      }
    }
  }
}

const Design* RenewalModel::ascertainment_design(int series_index) const {
  const auto& opt = ascertainment_[static_cast<std::size_t>(series_index)];
  return opt.has_value() ? &*opt : nullptr;
}

double RenewalModel::dispersion(const Eigen::VectorXd& params) const {
  if (spec_.mode != ModelMode::latent) {
    throw std::logic_error("dispersion only exists in latent mode");
  }
  if (spec_.fixed_dispersion.has_value()) return *spec_.fixed_dispersion;
  return std::exp(params[off_log_d_]);
}

double RenewalModel::phi(const Eigen::VectorXd& params, int series_index) const {
  const auto& obs = spec_.observations[static_cast<std::size_t>(series_index)];
  if (!needs_phi(obs.family)) throw std::logic_error(obs.name + " has no phi");
  if (obs.fixed_phi.has_value()) return *obs.fixed_phi;
  double u = params[off_phi_[static_cast<std::size_t>(series_index)]];
  return obs.family == ObsFamily::quasi_poisson ? 1.0 + std::exp(u) : std::exp(u);
}

std::vector<double> RenewalModel::seeds_from(const Eigen::VectorXd& params, int region) const {
  const int window = spec_.seeding.window;
  std::vector<double> seeds(static_cast<std::size_t>(window));
  double level = params[off_seed_level_ + region];
  for (int k = 0; k < window; ++k) {
    double noise = off_seed_noise_ >= 0 ? params[off_seed_noise_ + region * window + k] : 0.0;
    seeds[static_cast<std::size_t>(k)] = std::exp(level + noise);
  }
  return seeds;
}

std::vector<double> RenewalModel::seed_values(const Eigen::VectorXd& params, int region) const {
  return seeds_from(params, region);
}

std::string RenewalModel::seed_level_param_name(int region) const {
  if (n_regions() == 1) return "seed_log_level";
  return "seed_log_level[" + std::to_string(region) + "]";
}

std::string RenewalModel::intercept_param_name() const {
  if (!spec_.transmission.intercept) return "";
  if (spec_.transmission.intercept_pooling == PoolingMode::grouped) return "";
  return "R.b[intercept]";
}

double RenewalModel::log_posterior(const Eigen::VectorXd& params, Eigen::VectorXd* grad) const {
  if (static_cast<int>(params.size()) != dim()) {
    throw std::invalid_argument("parameter vector has wrong dimension");
  }
  if (grad != nullptr) {
    grad->resize(dim());
    grad->setZero();
    if (spec_.mode == ModelMode::latent && spec_.latent_family == LagFamily::weibull) {
      throw std::invalid_argument(
          "weibull latent family has no gradient; use a gradient-free sampler");
    }
  }
  double lp = 0.0;
  lp += transmission_.log_prior(params, grad);
  for (const auto& design : ascertainment_) {
    if (design.has_value()) lp += design->log_prior(params, grad);
  }
  for (std::size_t k = 0; k < spec_.observations.size(); ++k) {
    int off = off_phi_[k];
    if (off < 0) continue;
    double* g = grad != nullptr ? grad->data() + off : nullptr;
    lp += half_normal_log_prior(params[off], spec_.observations[k].phi_prior_scale, g);
  }
  for (int m = 0; m < n_regions(); ++m) {
    double* g = grad != nullptr ? grad->data() + off_seed_level_ + m : nullptr;
    lp += normal_log_pdf(params[off_seed_level_ + m], spec_.seeding.level_prior_mean,
                         spec_.seeding.level_prior_sd, g);
  }
  if (off_seed_noise_ >= 0) {
    const int n = n_regions() * spec_.seeding.window;
    for (int k = 0; k < n; ++k) {
      double* g = grad != nullptr ? grad->data() + off_seed_noise_ + k : nullptr;
      lp += normal_log_pdf(params[off_seed_noise_ + k], 0.0, spec_.seeding.daily_noise_sd, g);
    }
  }
  if (off_log_d_ >= 0) {
    double* g = grad != nullptr ? grad->data() + off_log_d_ : nullptr;
    lp += half_normal_log_prior(params[off_log_d_], spec_.dispersion_prior_scale, g);
  }
  for (int m = 0; m < n_regions(); ++m) {
    lp += region_contribution(params, m, grad, nullptr);
    if (!std::isfinite(lp)) break;
  }
  if (!std::isfinite(lp)) {
    if (grad != nullptr) grad->setZero();
    return kNegInf;
  }
  return lp;
}

std::vector<double> RenewalModel::pointwise_log_likelihood(const Eigen::VectorXd& params) const {
  std::vector<double> pointwise;
  pointwise.reserve(static_cast<std::size_t>(n_pointwise_));
  for (int m = 0; m < n_regions(); ++m) {
    region_contribution(params, m, nullptr, &pointwise);
  }
  return pointwise;
}

// Forward evaluation and hand-coded reverse sweep for one region. The
// likelihood adjoints flow backwards through the delay convolutions, the
// renewal recursion (including the population saturation and its running
// cumulative), the link functions, and finally the regression designs.
double RenewalModel::region_contribution(const Eigen::VectorXd& params, int region,
                                         Eigen::VectorXd* grad,
                                         std::vector<double>* pointwise) const {
  const RegionData& rd = data_[static_cast<std::size_t>(region)];
  const int horizon = rd.horizon;
  const DiscretePmf& g = spec_.generation;
  const int seed_start = spec_.seeding.seed_start();
  const bool pop = spec_.population_adjustment;
  const double s0 = rd.population;

  Eigen::VectorXd eta_r = transmission_.linear_predictor(params, region);
  std::vector<double> reproduction(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    reproduction[static_cast<std::size_t>(t)] = transmission_.link().inverse(eta_r[t]);
  }

  InfectionPath path;
  path.seed_start = seed_start;
  path.seeds = seeds_from(params, region);
  path.values.assign(static_cast<std::size_t>(horizon), 0.0);
  path.mode = spec_.mode == ModelMode::latent ? PathMode::latent : PathMode::expected;
  if (pop) path.population = s0;

  double lp = 0.0;
  const int num_seeds = path.num_seed_days();
  double seed_total = 0.0;
  for (double s : path.seeds) seed_total += s;

  std::vector<double> load(static_cast<std::size_t>(horizon), 0.0);
  std::vector<double> sat(static_cast<std::size_t>(horizon), 0.0);   // 1 - exp(-x_t)
  std::vector<double> rem(static_cast<std::size_t>(horizon), 0.0);   // S0 - C_{t-1}
  std::vector<double> mu(static_cast<std::size_t>(horizon), 0.0);    // latent step means
  double dispersion_value = 0.0;

  if (spec_.mode == ModelMode::basic) {
    if (pop && seed_total >= s0) return kNegInf;
    double cumulative = seed_total;
    for (int t = 1; t <= horizon; ++t) {
      const std::size_t i = static_cast<std::size_t>(t - 1);
      load[i] = case_load(path, g, t);
      double value;
      if (pop) {
        rem[i] = s0 - cumulative;
        sat[i] = one_minus_exp_neg(reproduction[i] * load[i] / s0);
        value = rem[i] * sat[i];
      } else {
        value = reproduction[i] * load[i];
      }
      // extreme states overflow the recursion; reject instead of propagating inf
      if (!std::isfinite(value)) return kNegInf;
      path.values[i] = value;
      cumulative += value;
    }
  } else {
    dispersion_value = dispersion(params);
    double cumulative = seed_total;
    if (pop && cumulative >= s0) return kNegInf;
    const int off = off_latent_[static_cast<std::size_t>(region)];
    for (int t = 1; t <= horizon; ++t) {
      const std::size_t i = static_cast<std::size_t>(t - 1);
      double theta = params[off + t - 1];
      double value = std::exp(theta);
      load[i] = case_load(path, g, t);
      if (pop) {
        double upper = s0 - cumulative;
        if (!(upper > 0.0) || value > upper) return kNegInf;
        rem[i] = upper;
        sat[i] = one_minus_exp_neg(reproduction[i] * load[i] / s0);
        mu[i] = rem[i] * sat[i];
        lp += latent_step_log_pdf_truncated(spec_.latent_family, mu[i], dispersion_value,
                                            value, upper);
      } else {
        mu[i] = reproduction[i] * load[i];
        lp += latent_step_log_pdf(spec_.latent_family, mu[i], dispersion_value, value);
      }
      lp += theta;  // log |dI/dtheta| for I = exp(theta)
      if (!std::isfinite(lp)) return kNegInf;
      path.values[i] = value;
      cumulative += value;
    }
  }

  struct SeriesForward {
    std::vector<double> alpha;
    Eigen::VectorXd eta_alpha;
    std::vector<double> conv;
    std::vector<double> cumconv;  // binomial only, includes ascertainment
    double phi = 0.0;
  };
  const int n_obs = static_cast<int>(spec_.observations.size());
  std::vector<SeriesForward> fwd(static_cast<std::size_t>(n_obs));

  for (int k = 0; k < n_obs; ++k) {
    const auto& obs = spec_.observations[static_cast<std::size_t>(k)];
    const auto& series = rd.series[static_cast<std::size_t>(k)];
    SeriesForward& f = fwd[static_cast<std::size_t>(k)];
    f.conv = delay_convolution(path, obs.delay);
    const Design* adesign = ascertainment_design(k);
    if (adesign != nullptr) {
      f.eta_alpha = adesign->linear_predictor(params, region);
      f.alpha.resize(static_cast<std::size_t>(horizon));
      for (int t = 0; t < horizon; ++t) {
        f.alpha[static_cast<std::size_t>(t)] = adesign->link().inverse(f.eta_alpha[t]);
      }
    } else {
      f.alpha.assign(static_cast<std::size_t>(horizon),
                     obs.constant_ascertainment.value_or(1.0));
    }
    if (obs.family == ObsFamily::binomial) {
      f.cumconv.resize(static_cast<std::size_t>(horizon));
      double acc = 0.0;
      for (int t = 0; t < horizon; ++t) {
        acc += f.conv[static_cast<std::size_t>(t)];
        f.cumconv[static_cast<std::size_t>(t)] = f.alpha[static_cast<std::size_t>(t)] * acc;
      }
      for (int t = 0; t < horizon; ++t) {
        const std::size_t i = static_cast<std::size_t>(t);
        if (!series.mask.empty() && !series.mask[i]) continue;
        double p = std::min(1.0, f.cumconv[i] / s0);
        double ll = binomial_log_pmf(series.counts[i], series.trials[i], p);
        lp += ll;
        if (pointwise != nullptr) pointwise->push_back(ll);
        if (lp == kNegInf) return kNegInf;
      }
    } else {
      f.phi = needs_phi(obs.family) ? phi(params, k) : 0.0;
      for (int t = 0; t < horizon; ++t) {
        const std::size_t i = static_cast<std::size_t>(t);
        if (!series.mask.empty() && !series.mask[i]) continue;
        double y = f.alpha[i] * f.conv[i];
        double ll = obs_log_pmf(obs.family, series.counts[i], y, f.phi);
        lp += ll;
        if (pointwise != nullptr) pointwise->push_back(ll);
        if (lp == kNegInf) return kNegInf;
      }
    }
  }

  if (!std::isfinite(lp)) return kNegInf;
  if (grad == nullptr) return lp;

  // ----- reverse sweep -----
  std::vector<double> value_bar(static_cast<std::size_t>(horizon), 0.0);
  std::vector<double> seed_bar(static_cast<std::size_t>(num_seeds), 0.0);
  std::vector<double> repro_bar(static_cast<std::size_t>(horizon), 0.0);
  double dispersion_bar = 0.0;

  auto scatter_conv_bar = [&](const DiscretePmf& pmf, int t, double conv_bar) {
    // conv_t = sum_s path(s) * pmf(t - s)
    const int lo = std::max(seed_start, t - pmf.max_lag());
    const int hi = std::min(t, t - pmf.min_lag());
    for (int s = lo; s <= hi; ++s) {
      double w = pmf.at_lag(t - s);
      if (w == 0.0) continue;
      if (s >= 1) {
        value_bar[static_cast<std::size_t>(s - 1)] += conv_bar * w;
      } else {
        seed_bar[static_cast<std::size_t>(s - seed_start)] += conv_bar * w;
      }
    }
  };

  for (int k = 0; k < n_obs; ++k) {
    const auto& obs = spec_.observations[static_cast<std::size_t>(k)];
    const auto& series = rd.series[static_cast<std::size_t>(k)];
    SeriesForward& f = fwd[static_cast<std::size_t>(k)];
    const Design* adesign = ascertainment_design(k);
    Eigen::VectorXd alpha_bar;
    if (adesign != nullptr) alpha_bar = Eigen::VectorXd::Zero(horizon);

    if (obs.family == ObsFamily::binomial) {
      // cumconv_t = alpha_t * sum_{u<=t} conv_u; suffix-accumulate the
      // per-day probability adjoints back onto each conv_u.
      std::vector<double> cum_bar(static_cast<std::size_t>(horizon), 0.0);
      for (int t = 0; t < horizon; ++t) {
        const std::size_t i = static_cast<std::size_t>(t);
        if (!series.mask.empty() && !series.mask[i]) continue;
        double p = f.cumconv[i] / s0;
        if (!(p > 0.0) || p >= 1.0) continue;  // clamped or empty: flat
        double p_bar = binomial_log_pmf_grad(series.counts[i], series.trials[i], p);
        cum_bar[i] = p_bar / s0;
      }
      double suffix = 0.0;
      std::vector<double> conv_suffix(static_cast<std::size_t>(horizon), 0.0);
      for (int t = horizon - 1; t >= 0; --t) {
        const std::size_t i = static_cast<std::size_t>(t);
        suffix += cum_bar[i] * f.alpha[i];
        conv_suffix[i] = suffix;
      }
      for (int t = 1; t <= horizon; ++t) {
        double cb = conv_suffix[static_cast<std::size_t>(t - 1)];
        if (cb != 0.0) scatter_conv_bar(obs.delay, t, cb);
      }
    } else {
      double phi_bar = 0.0;
      for (int t = 0; t < horizon; ++t) {
        const std::size_t i = static_cast<std::size_t>(t);
        if (!series.mask.empty() && !series.mask[i]) continue;
        double y = f.alpha[i] * f.conv[i];
        if (!(y > 0.0)) continue;  // zero expectation: no live adjoint path
        ObsLogPmfGrad gr = obs_log_pmf_grad(obs.family, series.counts[i], y, f.phi);
        double conv_bar = gr.d_y * f.alpha[i];
        if (adesign != nullptr) alpha_bar[t] += gr.d_y * f.conv[i];
        phi_bar += gr.d_phi;
        if (conv_bar != 0.0) scatter_conv_bar(obs.delay, t + 1, conv_bar);
      }
      int off = off_phi_[static_cast<std::size_t>(k)];
      if (off >= 0) {
        // neg_binomial: phi = exp(u); quasi_poisson: phi = 1 + exp(u)
        double dphidu = obs.family == ObsFamily::quasi_poisson ? f.phi - 1.0 : f.phi;
        (*grad)[off] += phi_bar * dphidu;
      }
    }

    if (adesign != nullptr) {
      Eigen::VectorXd eta_bar(horizon);
      for (int t = 0; t < horizon; ++t) {
        eta_bar[t] = alpha_bar[t] * adesign->link().inverse_derivative(f.eta_alpha[t]);
      }
      adesign->backprop_linear_predictor(params, region, eta_bar, *grad);
    }
  }

  auto scatter_load_bar = [&](int t, double load_bar) {
    // load_t = sum_{s<t} path(s) * g(t - s)
    const int lo = std::max(seed_start, t - g.max_lag());
    const int hi = t - g.min_lag();
    for (int s = lo; s <= hi; ++s) {
      double w = g.at_lag(t - s);
      if (w == 0.0) continue;
      if (s >= 1) {
        value_bar[static_cast<std::size_t>(s - 1)] += load_bar * w;
      } else {
        seed_bar[static_cast<std::size_t>(s - seed_start)] += load_bar * w;
      }
    }
  };

  if (spec_.mode == ModelMode::basic) {
    if (pop) {
      double cum_bar = 0.0;
      for (int t = horizon; t >= 1; --t) {
        const std::size_t i = static_cast<std::size_t>(t - 1);
        value_bar[i] += cum_bar;
        double decay = 1.0 - sat[i];  // exp(-x_t)
        double common = value_bar[i] * rem[i] * decay / s0;
        repro_bar[i] += common * load[i];
        double load_bar = common * reproduction[i];
        if (load_bar != 0.0) scatter_load_bar(t, load_bar);
        cum_bar -= value_bar[i] * sat[i];
      }
      for (double& sb : seed_bar) sb += cum_bar;
    } else {
      for (int t = horizon; t >= 1; --t) {
        const std::size_t i = static_cast<std::size_t>(t - 1);
        repro_bar[i] += value_bar[i] * load[i];
        double load_bar = value_bar[i] * reproduction[i];
        if (load_bar != 0.0) scatter_load_bar(t, load_bar);
      }
    }
  } else {
    const int off = off_latent_[static_cast<std::size_t>(region)];
    double cum_bar = 0.0;
    for (int t = horizon; t >= 1; --t) {
      const std::size_t i = static_cast<std::size_t>(t - 1);
      if (pop) value_bar[i] += cum_bar;
      LatentStepGrad sg = latent_step_log_pdf_grad(spec_.latent_family, mu[i],
                                                   dispersion_value, path.values[i]);
      double mu_bar = sg.d_mean;
      double upper_bar = 0.0;
      dispersion_bar += sg.d_dispersion;
      if (pop) {
        TruncationGrad tg =
            latent_truncation_grad(spec_.latent_family, mu[i], dispersion_value, rem[i]);
        mu_bar += tg.d_mean;
        dispersion_bar += tg.d_dispersion;
        upper_bar = tg.d_upper;
      }
      value_bar[i] += sg.d_value;
      double load_bar;
      if (pop) {
        double decay = 1.0 - sat[i];
        double common = mu_bar * rem[i] * decay / s0;
        repro_bar[i] += common * load[i];
        load_bar = common * reproduction[i];
        cum_bar -= mu_bar * sat[i] + upper_bar;
      } else {
        repro_bar[i] += mu_bar * load[i];
        load_bar = mu_bar * reproduction[i];
      }
      if (load_bar != 0.0) scatter_load_bar(t, load_bar);
    }
    if (pop) {
      for (double& sb : seed_bar) sb += cum_bar;
    }
    for (int t = 0; t < horizon; ++t) {
      (*grad)[off + t] += value_bar[static_cast<std::size_t>(t)] *
                              path.values[static_cast<std::size_t>(t)] +
                          1.0;
    }
    if (off_log_d_ >= 0) (*grad)[off_log_d_] += dispersion_bar * dispersion_value;
  }

  Eigen::VectorXd eta_r_bar(horizon);
  for (int t = 0; t < horizon; ++t) {
    eta_r_bar[t] = repro_bar[static_cast<std::size_t>(t)] *
                   transmission_.link().inverse_derivative(eta_r[t]);
  }
  transmission_.backprop_linear_predictor(params, region, eta_r_bar, *grad);

  double level_bar = 0.0;
  for (int k = 0; k < num_seeds; ++k) {
    double contrib = seed_bar[static_cast<std::size_t>(k)] * path.seeds[static_cast<std::size_t>(k)];
    level_bar += contrib;
    if (off_seed_noise_ >= 0) {
      (*grad)[off_seed_noise_ + region * spec_.seeding.window + k] += contrib;
    }
  }
  (*grad)[off_seed_level_ + region] += level_bar;

  return lp;
}

ModelState RenewalModel::evaluate(const Eigen::VectorXd& params) const {
  ModelState state;
  for (int m = 0; m < n_regions(); ++m) {
    const RegionData& rd = data_[static_cast<std::size_t>(m)];
    const int horizon = rd.horizon;
    std::vector<double> reproduction(static_cast<std::size_t>(horizon));
    Eigen::VectorXd eta = transmission_.linear_predictor(params, m);
    for (int t = 0; t < horizon; ++t) {
      reproduction[static_cast<std::size_t>(t)] = transmission_.link().inverse(eta[t]);
    }
    std::vector<double> seeds = seeds_from(params, m);
    InfectionPath path;
    if (spec_.mode == ModelMode::basic) {
      path = propagate_expected(seeds, spec_.seeding.seed_start(), reproduction,
                                spec_.generation,
                                spec_.population_adjustment
                                    ? std::optional<double>(rd.population)
                                    : std::nullopt);
    } else {
      path.seed_start = spec_.seeding.seed_start();
      path.seeds = seeds;
      path.mode = PathMode::latent;
      if (spec_.population_adjustment) path.population = rd.population;
      path.values.resize(static_cast<std::size_t>(horizon));
      const int off = off_latent_[static_cast<std::size_t>(m)];
      for (int t = 0; t < horizon; ++t) {
        path.values[static_cast<std::size_t>(t)] = std::exp(params[off + t]);
      }
    }
    std::vector<std::vector<double>> expected;
    for (std::size_t k = 0; k < spec_.observations.size(); ++k) {
      const auto& obs = spec_.observations[k];
      std::vector<double> conv = delay_convolution(path, obs.delay);
      std::vector<double> alpha;
      const Design* adesign = ascertainment_design(static_cast<int>(k));
      if (adesign != nullptr) {
        alpha = adesign->rates(params, m);
      } else {
        alpha.assign(static_cast<std::size_t>(horizon), obs.constant_ascertainment.value_or(1.0));
      }
      std::vector<double> y(static_cast<std::size_t>(horizon));
      if (obs.family == ObsFamily::binomial) {
        const auto& series = rd.series[k];
        double acc = 0.0;
        for (int t = 0; t < horizon; ++t) {
          acc += conv[static_cast<std::size_t>(t)];
          double p = std::min(1.0, alpha[static_cast<std::size_t>(t)] * acc / rd.population);
          y[static_cast<std::size_t>(t)] =
              p * static_cast<double>(series.trials[static_cast<std::size_t>(t)]);
        }
      } else {
        for (int t = 0; t < horizon; ++t) {
          y[static_cast<std::size_t>(t)] =
              alpha[static_cast<std::size_t>(t)] * conv[static_cast<std::size_t>(t)];
        }
      }
      expected.push_back(std::move(y));
    }
    state.reproduction.push_back(std::move(reproduction));
    state.infections.push_back(std::move(path));
    state.expected_obs.push_back(std::move(expected));
  }
  return state;
}

Eigen::VectorXd RenewalModel::initial_point(Rng& rng) const {
  Eigen::VectorXd base = Eigen::VectorXd::Zero(dim());
  transmission_.fill_initial(base);
  for (const auto& design : ascertainment_) {
    if (design.has_value()) design->fill_initial(base);
  }
  for (std::size_t k = 0; k < spec_.observations.size(); ++k) {
    int off = off_phi_[k];
    if (off >= 0) {
      base[off] = std::log(kHalfNormalMedian * spec_.observations[k].phi_prior_scale);
    }
  }
  for (int m = 0; m < n_regions(); ++m) {
    base[off_seed_level_ + m] = spec_.seeding.level_prior_mean;
  }
  if (off_log_d_ >= 0) {
    base[off_log_d_] = std::log(kHalfNormalMedian * spec_.dispersion_prior_scale);
  }
  if (spec_.mode == ModelMode::latent) {
    for (int m = 0; m < n_regions(); ++m) {
      const RegionData& rd = data_[static_cast<std::size_t>(m)];
      std::vector<double> reproduction(static_cast<std::size_t>(rd.horizon));
      Eigen::VectorXd eta = transmission_.linear_predictor(base, m);
      for (int t = 0; t < rd.horizon; ++t) {
        reproduction[static_cast<std::size_t>(t)] = transmission_.link().inverse(eta[t]);
      }
      InfectionPath expected = propagate_expected(
          seeds_from(base, m), spec_.seeding.seed_start(), reproduction, spec_.generation,
          spec_.population_adjustment ? std::optional<double>(rd.population) : std::nullopt);
      const int off = off_latent_[static_cast<std::size_t>(m)];
      for (int t = 0; t < rd.horizon; ++t) {
        base[off + t] = std::log(std::max(expected.values[static_cast<std::size_t>(t)], 1e-8));
      }
    }
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  double jitter = 0.05;
  for (int attempt = 0; attempt < 21; ++attempt) {
    Eigen::VectorXd trial = base;
    if (jitter > 0.0) {
      for (int i = 0; i < trial.size(); ++i) trial[i] += jitter * normal(rng);
      if (spec_.mode == ModelMode::latent) {
        // keep latent proposals tight around the deterministic path
        for (std::size_t m = 0; m < off_latent_.size(); ++m) {
          const int off = off_latent_[m];
          for (int t = 0; t < data_[m].horizon; ++t) {
            trial[off + t] = base[off + t] + 0.2 * jitter * normal(rng);
          }
        }
      }
    }
    if (std::isfinite(log_posterior(trial, nullptr))) return trial;
    jitter = attempt >= 19 ? 0.0 : jitter * 0.5;
  }
  throw std::runtime_error("failed to find a finite starting point");
}

}  // namespace epirenew

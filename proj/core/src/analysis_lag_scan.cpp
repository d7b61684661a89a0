#include <cmath>
#include <fstream>
#include <stdexcept>

#include "epirenew/analysis.hpp"
#include "epirenew/math_utils.hpp"
#include "epirenew/text_io.hpp"

namespace epirenew {

namespace {

// Rows where the shifted covariate would fall off the data range are dropped
// from both sides of the regression.
bool shift_group(const RegionCovariates& group, const GaussianGroupData& target, int lag,
                 RegionCovariates& out_cov, GaussianGroupData& out_target) {
  const int horizon = group.horizon;
  const int start = std::max(0, lag);
  const int stop = std::min(horizon, horizon + lag);
  if (stop - start < 3) return false;
  out_cov.region = group.region;
  out_cov.horizon = stop - start;
  for (const auto& [name, values] : group.columns) {
    std::vector<double> shifted;
    for (int t = start; t < stop; ++t) {
      shifted.push_back(values[static_cast<std::size_t>(t - lag)]);
    }
    out_cov.columns.emplace(name, std::move(shifted));
  }
  out_target.group = target.group;
  out_target.outcomes.assign(target.outcomes.begin() + start, target.outcomes.begin() + stop);
  if (!target.obs_sd.empty()) {
    out_target.obs_sd.assign(target.obs_sd.begin() + start, target.obs_sd.begin() + stop);
  }
  return true;
}

}  // namespace

LagScanResult lag_scan_regression(const std::vector<GaussianGroupData>& targets,
                                  const std::vector<RegionCovariates>& covariates,
                                  const LagScanConfig& config) {
  if (targets.size() != covariates.size() || targets.empty()) {
    throw std::invalid_argument("lag scan needs matching target and covariate groups");
  }
  if (config.min_lag > config.max_lag) {
    throw std::invalid_argument("lag range is empty");
  }

  DesignSpec design;
  design.link = LinkFunction::identity();
  design.intercept = false;
  design.horseshoe = config.horseshoe;
  for (const auto& [name, values] : covariates.front().columns) {
    CovariateTerm term;
    term.name = name;
    term.pooling = PoolingMode::fixed;
    term.prior = CoefficientPrior::shrinkage;
    design.terms.push_back(std::move(term));
  }

  LagScanResult result;
  double best_mae = kPosInf;
  for (int lag = config.min_lag; lag <= config.max_lag; ++lag) {
    LagScanEntry entry;
    entry.lag = lag;
    std::vector<RegionCovariates> cov;
    std::vector<GaussianGroupData> tgt;
    bool ok = true;
    for (std::size_t m = 0; m < targets.size(); ++m) {
      RegionCovariates c;
      GaussianGroupData t;
      if (!shift_group(covariates[m], targets[m], lag, c, t)) {
        ok = false;
        break;
      }
      cov.push_back(std::move(c));
      tgt.push_back(std::move(t));
    }
    if (!ok) {
      entry.skipped = true;
      entry.note = "lag shifts past the data range";
      result.entries.push_back(std::move(entry));
      continue;
    }

    GaussianRegressionModel model(design, cov, tgt, config.sigma_prior_scale);
    PosteriorDraws draws = run_sampler(model, config.sampler);

    Eigen::VectorXd mean_params = Eigen::VectorXd::Zero(model.dim());
    for (int c = 0; c < draws.n_chains(); ++c) {
      for (int d = 0; d < draws.n_draws(); ++d) {
        mean_params += draws.draw_vector(c, d);
      }
    }
    mean_params /= static_cast<double>(draws.total_draws());
    entry.mae = model.mean_absolute_error(mean_params);

    for (const auto& name : model.design().column_names()) {
      std::vector<double> coef;
      coef.reserve(static_cast<std::size_t>(draws.total_draws()));
      for (int c = 0; c < draws.n_chains(); ++c) {
        for (int d = 0; d < draws.n_draws(); ++d) {
          coef.push_back(model.design().fixed_coefficient(draws.draw_vector(c, d), name));
        }
      }
      LagScanCoefficient lc;
      lc.name = name;
      lc.mean = mean_of(coef);
      lc.q025 = quantile_of(coef, 0.025);
      lc.q50 = quantile_of(coef, 0.5);
      lc.q975 = quantile_of(coef, 0.975);
      entry.coefficients.push_back(std::move(lc));
    }
    if (entry.mae < best_mae) {
      best_mae = entry.mae;
      result.best_lag = lag;
    }
    result.entries.push_back(std::move(entry));
  }

  if (!std::isfinite(best_mae)) {
    throw std::runtime_error("every lag in the scan was skipped");
  }
  return result;
}

void save_lag_scan(const LagScanResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "lag,skipped,mae,coefficient,mean,q2.5,q50,q97.5\n";
  for (const auto& entry : result.entries) {
    if (entry.skipped) {
      out << entry.lag << ",1,,,,,,\n";
      continue;
    }
    for (const auto& c : entry.coefficients) {
      out << entry.lag << ",0," << format_double(entry.mae) << ',' << c.name << ','
          << format_double(c.mean) << ',' << format_double(c.q025) << ','
          << format_double(c.q50) << ',' << format_double(c.q975) << '\n';
    }
  }
  out << "# best_lag=" << result.best_lag << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace epirenew

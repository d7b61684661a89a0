#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "epirenew/analysis.hpp"
#include "epirenew/diagnostics.hpp"
#include "epirenew/fit.hpp"
#include "epirenew/math_utils.hpp"
#include "epirenew/parallel.hpp"
#include "epirenew/text_io.hpp"

namespace epirenew {

namespace {

struct Stage1Fit {
  std::vector<std::vector<double>> log_median;  // per day
  SeriesQuantiles bands;
  double max_rhat = 0.0;
};

// Daily reproduction-number draws for one region, reduced to medians, bands
// and a convergence statistic on the derived quantity itself.
Stage1Fit fit_one_region(const ModelSpec& spec, const RegionData& region,
                         SamplerConfig sampler) {
  RenewalModel model(spec, {region});
  PosteriorDraws draws = fit_model(model, sampler);

  const int horizon = region.horizon;
  std::vector<std::vector<std::vector<double>>> per_day_chains(
      static_cast<std::size_t>(horizon),
      std::vector<std::vector<double>>(static_cast<std::size_t>(draws.n_chains())));
  for (int c = 0; c < draws.n_chains(); ++c) {
    for (int d = 0; d < draws.n_draws(); ++d) {
      ModelState state = model.evaluate(draws.draw_vector(c, d));
      const auto& repro = state.reproduction.front();
      for (int t = 0; t < horizon; ++t) {
        per_day_chains[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)].push_back(
            repro[static_cast<std::size_t>(t)]);
      }
    }
  }

  Stage1Fit out;
  out.bands.quantity = "reproduction";
  out.bands.region = region.name;
  for (int t = 0; t < horizon; ++t) {
    auto& chains = per_day_chains[static_cast<std::size_t>(t)];
    std::vector<double> all;
    for (const auto& c : chains) all.insert(all.end(), c.begin(), c.end());
    out.bands.q025.push_back(quantile_of(all, 0.025));
    out.bands.q50.push_back(quantile_of(all, 0.5));
    out.bands.q975.push_back(quantile_of(all, 0.975));
    double rhat = split_rhat(chains);
    if (std::isfinite(rhat)) out.max_rhat = std::max(out.max_rhat, rhat);
  }
  out.log_median.resize(1);
  for (double q : out.bands.q50) out.log_median.front().push_back(std::log(q));
  return out;
}

}  // namespace

TwoStageResult two_stage(const TwoStageConfig& config, const std::vector<RegionData>& data) {
  if (data.empty()) throw std::invalid_argument("two-stage needs at least one region");
  if (config.variants.empty()) throw std::invalid_argument("two-stage needs model variants");
  if (!config.stage1.transmission.walk.has_value() ||
      config.stage1.transmission.walk->timescale != WalkTimescale::daily) {
    throw std::invalid_argument("stage one must use a daily random walk transmission model");
  }

  // stage 1: independent per-region fits, chains kept serial inside each
  SamplerConfig stage1_sampler = config.stage1_sampler;
  int workers = resolve_threads(config.threads);
  if (workers > 1) stage1_sampler.threads = 1;
  std::vector<Stage1Fit> fits(data.size());
  parallel_for(static_cast<int>(data.size()), workers, [&](int m) {
    fits[static_cast<std::size_t>(m)] =
        fit_one_region(config.stage1, data[static_cast<std::size_t>(m)], stage1_sampler);
  });

  TwoStageResult result;
  for (const auto& fit : fits) {
    result.stage1_max_rhat = std::max(result.stage1_max_rhat, fit.max_rhat);
    result.stage1_reproduction.push_back(fit.bands);
  }
  if (result.stage1_max_rhat > config.rhat_gate) {
    throw std::runtime_error(
        "stage one did not converge: max rhat on reproduction numbers = " +
        format_double(result.stage1_max_rhat) + " exceeds gate " +
        format_double(config.rhat_gate));
  }

  // stage 2: identical targets for every variant
  std::vector<GaussianGroupData> targets;
  std::vector<RegionCovariates> groups;
  for (std::size_t m = 0; m < data.size(); ++m) {
    GaussianGroupData t;
    t.group = data[m].name;
    t.outcomes = fits[m].log_median.front();
    targets.push_back(std::move(t));
    groups.push_back({data[m].name, data[m].horizon, data[m].covariates});
  }

  for (const auto& variant : config.variants) {
    DesignSpec design;
    design.link = LinkFunction::identity();
    design.intercept = true;
    design.intercept_pooling = PoolingMode::fixed_and_grouped;
    design.horseshoe = config.horseshoe;
    for (const auto& name : variant.covariates) {
      CovariateTerm term;
      term.name = name;
      term.pooling = PoolingMode::fixed_and_grouped;
      term.prior = CoefficientPrior::shrinkage;
      design.terms.push_back(std::move(term));
    }

    GaussianRegressionModel model(design, groups, targets, config.stage2_sigma_prior_scale);
    PosteriorDraws draws = run_sampler(model, config.stage2_sampler);
    FitDiagnostics diag = diagnose(draws);

    TwoStageVariantFit fit;
    fit.name = variant.name;
    fit.coefficients = summarize_draws(draws, &diag);
    fit.waic = waic(pointwise_matrix(model, draws));
    result.variants.push_back(std::move(fit));
  }

  for (std::size_t a = 0; a < result.variants.size(); ++a) {
    for (std::size_t b = a + 1; b < result.variants.size(); ++b) {
      result.comparisons.push_back(
          compare_waic(result.variants[a].waic, result.variants[b].waic,
                       result.variants[a].name, result.variants[b].name));
    }
  }
  return result;
}

void save_two_stage(const TwoStageResult& result, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  save_series_report(result.stage1_reproduction, (fs::path(directory) / "stage1_rt.csv").string());

  std::ofstream coeff((fs::path(directory) / "stage2_coefficients.csv").string());
  if (!coeff) throw std::runtime_error("cannot write stage2_coefficients.csv");
  coeff << "variant,name,mean,sd,q2.5,q50,q97.5,rhat,ess_bulk\n";
  for (const auto& variant : result.variants) {
    for (const auto& row : variant.coefficients) {
      coeff << variant.name << ',' << row.name << ',' << format_double(row.mean) << ','
            << format_double(row.sd) << ',' << format_double(row.q025) << ','
            << format_double(row.q50) << ',' << format_double(row.q975) << ','
            << format_double(row.rhat) << ',' << format_double(row.ess_bulk) << '\n';
    }
  }

  std::ofstream table((fs::path(directory) / "waic.csv").string());
  if (!table) throw std::runtime_error("cannot write waic.csv");
  table << "variant,elpd,se,p_eff\n";
  for (const auto& variant : result.variants) {
    table << variant.name << ',' << format_double(variant.waic.elpd) << ','
          << format_double(variant.waic.se) << ',' << format_double(variant.waic.p_eff)
          << '\n';
  }
  table << "model_a,model_b,elpd_diff,se_diff\n";
  for (const auto& cmp : result.comparisons) {
    table << cmp.model_a << ',' << cmp.model_b << ',' << format_double(cmp.elpd_diff) << ','
          << format_double(cmp.se_diff) << '\n';
  }
}

}  // namespace epirenew

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epirenew/gaussian_regression.hpp"
#include "epirenew/hmc.hpp"
#include "epirenew/model.hpp"
#include "epirenew/summarize.hpp"
#include "epirenew/waic.hpp"

namespace epirenew {

// ---------------------------------------------------------------------------
// Lag scan: regress a daily target on covariates shifted by each lag in a
// range, with no intercept and no pooling, under the shrinkage prior. The lag
// with the smallest mean absolute error wins; covariate value at day t - lag
// predicts the target at day t.
// ---------------------------------------------------------------------------

struct LagScanConfig {
  int min_lag = -7;
  int max_lag = 7;
  SamplerConfig sampler;
  double sigma_prior_scale = 1.0;
  HorseshoeConfig horseshoe;
};

struct LagScanCoefficient {
  std::string name;
  double mean;
  double q025;
  double q50;
  double q975;
};

struct LagScanEntry {
  int lag = 0;
  bool skipped = false;
  std::string note;
  double mae = 0.0;
  std::vector<LagScanCoefficient> coefficients;
};

struct LagScanResult {
  std::vector<LagScanEntry> entries;
  int best_lag = 0;
};

LagScanResult lag_scan_regression(const std::vector<GaussianGroupData>& targets,
                                  const std::vector<RegionCovariates>& covariates,
                                  const LagScanConfig& config);

void save_lag_scan(const LagScanResult& result, const std::string& path);

// ---------------------------------------------------------------------------
// Two-stage pipeline: per-region daily-random-walk fits give posterior median
// reproduction numbers; those medians (log scale) are then regressed on
// covariate subsets with partially pooled intercepts and effects, and the
// variants are ranked by WAIC.
// ---------------------------------------------------------------------------

struct TwoStageVariant {
  std::string name;
  std::vector<std::string> covariates;
};

struct TwoStageConfig {
  ModelSpec stage1;  // transmission must contain a daily random walk
  SamplerConfig stage1_sampler;
  SamplerConfig stage2_sampler;
  double rhat_gate = 1.05;
  std::vector<TwoStageVariant> variants;
  HorseshoeConfig horseshoe;
  double stage2_sigma_prior_scale = 1.0;
  int threads = 0;  // parallel per-region stage-1 fits
};

struct TwoStageVariantFit {
  std::string name;
  std::vector<SummaryRow> coefficients;
  WaicResult waic;
};

struct TwoStageResult {
  std::vector<SeriesQuantiles> stage1_reproduction;
  double stage1_max_rhat = 0.0;
  std::vector<TwoStageVariantFit> variants;
  std::vector<WaicComparison> comparisons;
};

TwoStageResult two_stage(const TwoStageConfig& config, const std::vector<RegionData>& data);

void save_two_stage(const TwoStageResult& result, const std::string& directory);

// ---------------------------------------------------------------------------
// Mediation: the treatment effect is fitted once alone and once alongside the
// mediator; the mediated effect is the drop in the treatment coefficient,
// paired draw by draw across the two posteriors (an approximation, flagged).
// ---------------------------------------------------------------------------

struct MediationConfig {
  DiscretePmf generation;
  std::vector<ObservationModelSpec> observations;
  SeedingConfig seeding;
  std::string treatment;
  std::string mediator;
  SamplerConfig sampler;
  LinkFunction link = LinkFunction::log_link();
  double intercept_prior_sd = 1.0;
  double effect_prior_sd = 0.5;
  double walk_scale_prior_sd = 0.2;
  bool population_adjustment = false;
};

struct MediationResult {
  std::vector<SummaryRow> total_model;    // treatment only
  std::vector<SummaryRow> partial_model;  // treatment plus mediator
  double total_effect_mean = 0.0;
  double partial_effect_mean = 0.0;
  // log-scale mediated effect: total minus partial treatment coefficient
  double mediated_mean = 0.0;
  double mediated_q025 = 0.0;
  double mediated_q50 = 0.0;
  double mediated_q975 = 0.0;
  // 1 - exp(mediated) per draw
  double reduction_mean = 0.0;
  double reduction_q025 = 0.0;
  double reduction_q50 = 0.0;
  double reduction_q975 = 0.0;
  double p_reduction_positive = 0.0;  // equals P(mediated log effect < 0)
  bool independent_fit_caveat = true;
};

MediationResult mediation(const MediationConfig& config, const std::vector<RegionData>& data);

void save_mediation(const MediationResult& result, const std::string& path);

}  // namespace epirenew

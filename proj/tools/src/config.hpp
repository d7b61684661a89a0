#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "epirenew/analysis.hpp"
#include "epirenew/hmc.hpp"
#include "epirenew/model.hpp"

namespace epirenew::tool {

struct SimulateSettings {
  int horizon = 0;
  std::vector<std::string> regions;
  std::vector<double> reproduction;  // one value (constant) or per-day
  double seed_level = 1.0;           // daily infections over the seed window
  std::optional<double> population;
  bool sample_counts = true;
  std::string start_date = "2020-01-01";
};

struct TwoStageSettings {
  std::vector<TwoStageVariant> variants;
  double rhat_gate = 1.05;
  SamplerConfig stage2_sampler;
  double stage2_sigma_prior_scale = 1.0;
  HorseshoeConfig horseshoe;
};

struct MediationSettings {
  std::string treatment;
  std::string mediator;
  double intercept_prior_sd = 1.0;
  double effect_prior_sd = 0.5;
  double walk_scale_prior_sd = 0.2;
};

struct VerifySettings {
  int lemma_runs = 100000;
  int dispersion_runs = 100000;
  int observation_runs = 200;
  int consistency_runs = 10000;
};

// Resolved run configuration. `raw` is the canonical config after flag
// overrides; it is what the manifest records and what reruns consume.
struct RunConfig {
  nlohmann::json raw;
  std::string observations_path;
  std::string covariates_path;
  std::string populations_path;
  std::optional<ModelSpec> model;
  SamplerConfig sampler;
  std::uint64_t seed = 1;
  std::string output = "out";
  std::optional<SimulateSettings> simulate;
  std::optional<TwoStageSettings> twostage;
  std::optional<MediationSettings> mediation;
  VerifySettings verify;
};

struct FlagOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::optional<int> chains;
  std::optional<int> draws;
};

// Loads and validates a config file (or a manifest, whose embedded config is
// unwrapped), applies flag overrides, and builds the typed settings the
// subcommand needs. Unknown keys anywhere are an error.
RunConfig load_config(const std::string& path, const std::string& subcommand,
                      const FlagOverrides& overrides);

// Writes output_dir/manifest.json capturing the resolved config, its hash,
// the seed, and the build version.
void write_manifest(const RunConfig& config, const std::string& subcommand);

std::string config_hash(const nlohmann::json& canonical);

}  // namespace epirenew::tool

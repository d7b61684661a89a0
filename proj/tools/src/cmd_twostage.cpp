#include <iostream>

#include "commands.hpp"
#include "ingest.hpp"
#include "epirenew/analysis.hpp"
#include "epirenew/text_io.hpp"

namespace epirenew::tool {

int cmd_twostage(const RunConfig& config) {
  const TwoStageSettings& settings = *config.twostage;
  IngestResult ingest = load_region_data(config.observations_path, config.covariates_path,
                                         config.populations_path, *config.model);
  for (const auto& warning : ingest.warnings) std::cerr << "warning: " << warning << '\n';

  TwoStageConfig ts;
  ts.stage1 = *config.model;
  ts.stage1_sampler = config.sampler;
  ts.stage1_sampler.seed = config.seed;
  bool has_stage2 = config.raw.contains("twostage") &&
                    config.raw.at("twostage").contains("stage2_sampler");
  ts.stage2_sampler = has_stage2 ? settings.stage2_sampler : config.sampler;
  ts.stage2_sampler.seed = config.seed + 1;
  ts.rhat_gate = settings.rhat_gate;
  ts.variants = settings.variants;
  ts.horseshoe = settings.horseshoe;
  ts.stage2_sigma_prior_scale = settings.stage2_sigma_prior_scale;
  ts.threads = config.sampler.threads;

  TwoStageResult result = two_stage(ts, ingest.regions);
  save_two_stage(result, config.output);
  write_manifest(config, "twostage");

  std::cout << "twostage: stage-1 max rhat " << format_double(result.stage1_max_rhat) << '\n';
  for (const auto& variant : result.variants) {
    std::cout << "  " << variant.name << ": elpd " << format_double(variant.waic.elpd)
              << " (se " << format_double(variant.waic.se) << ")\n";
  }
  for (const auto& cmp : result.comparisons) {
    std::cout << "  " << cmp.model_a << " vs " << cmp.model_b << ": elpd diff "
              << format_double(cmp.elpd_diff) << " (se " << format_double(cmp.se_diff)
              << ")\n";
  }
  return 0;
}

}  // namespace epirenew::tool

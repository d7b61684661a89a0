#include <filesystem>
#include <iostream>

#include "commands.hpp"
#include "ingest.hpp"
#include "epirenew/analysis.hpp"
#include "epirenew/text_io.hpp"

namespace epirenew::tool {

int cmd_mediate(const RunConfig& config) {
  const MediationSettings& settings = *config.mediation;
  const ModelSpec& spec = *config.model;
  IngestResult ingest = load_region_data(config.observations_path, config.covariates_path,
                                         config.populations_path, spec);
  for (const auto& warning : ingest.warnings) std::cerr << "warning: " << warning << '\n';

  MediationConfig mc;
  mc.generation = spec.generation;
  mc.observations = spec.observations;
  mc.seeding = spec.seeding;
  mc.treatment = settings.treatment;
  mc.mediator = settings.mediator;
  mc.sampler = config.sampler;
  mc.sampler.seed = config.seed;
  mc.intercept_prior_sd = settings.intercept_prior_sd;
  mc.effect_prior_sd = settings.effect_prior_sd;
  mc.walk_scale_prior_sd = settings.walk_scale_prior_sd;
  mc.population_adjustment = spec.population_adjustment;

  MediationResult result = mediation(mc, ingest.regions);
  std::filesystem::create_directories(config.output);
  save_mediation(result, (std::filesystem::path(config.output) / "mediation.csv").string());
  write_manifest(config, "mediate");

  std::cout << "mediate: mediated log effect " << format_double(result.mediated_mean) << " ["
            << format_double(result.mediated_q025) << ", " << format_double(result.mediated_q975)
            << "], transmission reduction " << format_double(100.0 * result.reduction_mean)
            << "% [" << format_double(100.0 * result.reduction_q025) << "%, "
            << format_double(100.0 * result.reduction_q975) << "%], P(reduction > 0) = "
            << format_double(result.p_reduction_positive) << '\n';
  return 0;
}

}  // namespace epirenew::tool

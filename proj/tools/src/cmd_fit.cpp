#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "commands.hpp"
#include "ingest.hpp"
#include "epirenew/fit.hpp"
#include "epirenew/math_utils.hpp"
#include "epirenew/summarize.hpp"
#include "epirenew/text_io.hpp"

namespace epirenew::tool {

namespace {

void write_diagnostics(const std::filesystem::path& path, const RenewalModel& model,
                       const PosteriorDraws& draws, const FitDiagnostics& diag) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "name,value\n";
  out << "max_rhat," << format_double(diag.max_rhat) << '\n';
  out << "min_ess_bulk," << format_double(diag.min_ess) << '\n';
  out << "total_divergences," << diag.total_divergences << '\n';
  out << "total_max_depth_hits," << diag.total_max_depth_hits << '\n';
  for (std::size_t c = 0; c < draws.stats.size(); ++c) {
    out << "divergences[" << c << "]," << draws.stats[c].divergences << '\n';
    out << "step_size[" << c << "]," << format_double(draws.stats[c].step_size) << '\n';
    out << "mean_accept[" << c << "]," << format_double(draws.stats[c].mean_accept) << '\n';
  }
  // seeding level vs transmission intercept: strong negative correlation
  // flags the usual level/intercept confounding
  std::string intercept = model.intercept_param_name();
  if (!intercept.empty() && draws.param_index(intercept) >= 0) {
    for (int r = 0; r < model.n_regions(); ++r) {
      std::string seed_name = model.seed_level_param_name(r);
      if (draws.param_index(seed_name) < 0) continue;
      double corr = correlation_of(draws.column(seed_name), draws.column(intercept));
      out << "seed_intercept_corr[" << model.data()[r].name << "],"
          << format_double(corr) << '\n';
    }
  }
}

}  // namespace

int cmd_fit(const RunConfig& config) {
  IngestResult ingest = load_region_data(config.observations_path, config.covariates_path,
                                         config.populations_path, *config.model);
  for (const auto& warning : ingest.warnings) std::cerr << "warning: " << warning << '\n';

  RenewalModel model(*config.model, ingest.regions);
  PosteriorDraws draws = fit_model(model, config.sampler);
  FitDiagnostics diag = diagnose(draws);

  namespace fs = std::filesystem;
  fs::create_directories(config.output);
  draws.save((fs::path(config.output) / "draws.csv").string());
  save_summary(summarize_draws(draws, &diag), (fs::path(config.output) / "summary.csv").string());
  write_diagnostics(fs::path(config.output) / "diagnostics.csv", model, draws, diag);

  int stride = std::max(1, draws.total_draws() / 200);
  save_series_report(model_series_report(model, draws, stride),
                     (fs::path(config.output) / "series.csv").string());
  write_manifest(config, "fit");

  std::cout << "fit: " << model.n_regions() << " region(s), " << model.dim()
            << " parameters, max rhat " << format_double(diag.max_rhat) << ", min bulk ESS "
            << format_double(diag.min_ess) << ", divergences " << diag.total_divergences
            << '\n';
  return 0;
}

}  // namespace epirenew::tool

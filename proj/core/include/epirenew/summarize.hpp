#pragma once

#include <string>
#include <vector>

#include "epirenew/diagnostics.hpp"
#include "epirenew/draws.hpp"
#include "epirenew/model.hpp"

namespace epirenew {

struct SummaryRow {
  std::string name;
  double mean;
  double sd;
  double q025;
  double q50;
  double q975;
  double rhat;
  double ess_bulk;
};

std::vector<SummaryRow> summarize_draws(const PosteriorDraws& draws,
                                        const FitDiagnostics* diagnostics = nullptr);

// name,mean,sd,q2.5,q50,q97.5,rhat,ess_bulk
void save_summary(const std::vector<SummaryRow>& rows, const std::string& path);

// Credible bands for one per-day quantity in one region.
struct SeriesQuantiles {
  std::string quantity;
  std::string region;
  std::vector<double> q025;
  std::vector<double> q50;
  std::vector<double> q975;
};

// quantity,t,region,q2.5,q50,q97.5 with t starting at 1
void save_series_report(const std::vector<SeriesQuantiles>& series, const std::string& path);

// Posterior bands for reproduction numbers, infection paths, and expected
// observations, evaluated over (a stride of) the stored draws.
std::vector<SeriesQuantiles> model_series_report(const RenewalModel& model,
                                                 const PosteriorDraws& draws, int stride = 1);

}  // namespace epirenew

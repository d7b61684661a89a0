#pragma once

#include <string>
#include <vector>

#include "epirenew/draws.hpp"

namespace epirenew {

// Potential scale reduction on rank-normalized split chains. Returns NaN when
// the draws are constant or too short to split.
double split_rhat(const std::vector<std::vector<double>>& chains);

// Bulk effective sample size on rank-normalized split chains, using paired
// autocorrelation sums with the initial monotone positive truncation.
double bulk_ess(const std::vector<std::vector<double>>& chains);

struct ParamDiagnostics {
  std::string name;
  double rhat;
  double ess_bulk;
};

struct FitDiagnostics {
  std::vector<ParamDiagnostics> params;
  double max_rhat;
  double min_ess;
  int total_divergences;
  int total_max_depth_hits;
};

FitDiagnostics diagnose(const PosteriorDraws& draws);

// Internal helpers, exposed for testing.
std::vector<std::vector<double>> split_chains(const std::vector<std::vector<double>>& chains);
std::vector<std::vector<double>> rank_normalize(const std::vector<std::vector<double>>& chains);

}  // namespace epirenew

#pragma once

#include <string>
#include <vector>

#include "epirenew/model.hpp"

namespace epirenew::tool {

// Region data assembled from the input files. Day 1 is `start_date`, the
// earliest date in the observations file; all regions share one window.
struct IngestResult {
  std::vector<RegionData> regions;
  std::string start_date;
  int horizon = 0;
  std::vector<std::string> warnings;
};

// Reads observations (`region,date,type,value`), optional covariates
// (`region,date,name,value`), and optional populations (`region,population`).
// Binomial series are assembled from `<name>_positive` / `<name>_tests` row
// types. Duplicate rows and negative values are errors; days a region never
// reports are masked out with a warning.
IngestResult load_region_data(const std::string& observations_path,
                              const std::string& covariates_path,
                              const std::string& populations_path, const ModelSpec& spec);

}  // namespace epirenew::tool

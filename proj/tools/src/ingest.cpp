#include "ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "dates.hpp"
#include "epirenew/text_io.hpp"

namespace epirenew::tool {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("ingest: " + msg); }

struct CsvFile {
  std::string path;
  std::vector<std::vector<std::string>> rows;
};

CsvFile read_csv(const std::string& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  CsvFile file;
  file.path = path;
  std::string line;
  if (!std::getline(in, line)) fail(path + " is empty");
  if (trim(line) != header) {
    fail(path + " must start with header \"" + header + "\", got \"" +
         std::string(trim(line)) + "\"");
  }
  std::size_t expected = split_csv_line(header).size();
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != expected) {
      fail(path + ":" + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
           " fields, expected " + std::to_string(expected));
    }
    for (auto& f : fields) f = trim(f);
    file.rows.push_back(std::move(fields));
  }
  return file;
}

}  // namespace

IngestResult load_region_data(const std::string& observations_path,
                              const std::string& covariates_path,
                              const std::string& populations_path, const ModelSpec& spec) {
  if (observations_path.empty()) fail("no observations file configured");
  CsvFile obs_file = read_csv(observations_path, "region,date,type,value");
  if (obs_file.rows.empty()) fail(observations_path + " has no data rows");

  // Row types the model accepts; binomial series split into two row types.
  std::map<std::string, std::string> type_to_series;  // row type -> series name
  std::set<std::string> binomial_series;
  for (const auto& obs : spec.observations) {
    if (obs.family == ObsFamily::binomial) {
      type_to_series[obs.name + "_positive"] = obs.name;
      type_to_series[obs.name + "_tests"] = obs.name;
      binomial_series.insert(obs.name);
    } else {
      type_to_series[obs.name] = obs.name;
    }
  }

  // region -> row type -> day (absolute) -> value
  std::map<std::string, std::map<std::string, std::map<long, long>>> table;
  long min_day = 0, max_day = 0;
  bool have_day = false;
  for (const auto& row : obs_file.rows) {
    const std::string& region = row[0];
    long day = parse_date(row[1]);
    const std::string& type = row[2];
    if (!type_to_series.count(type)) {
      fail(observations_path + ": row type \"" + type + "\" matches no configured series");
    }
    long value = parse_long(row[3]);
    if (value < 0) {
      fail(observations_path + ": negative value for " + region + " " + row[1] + " " + type);
    }
    auto [it, inserted] = table[region][type].emplace(day, value);
    if (!inserted) {
      fail(observations_path + ": duplicate row for " + region + " " + row[1] + " " + type);
    }
    if (!have_day) {
      min_day = max_day = day;
      have_day = true;
    } else {
      min_day = std::min(min_day, day);
      max_day = std::max(max_day, day);
    }
  }
  int horizon = static_cast<int>(max_day - min_day) + 1;

  IngestResult result;
  result.start_date = format_date(min_day);
  result.horizon = horizon;

  for (auto& [region_name, by_type] : table) {
    RegionData region;
    region.name = region_name;
    region.horizon = horizon;
    for (const auto& obs : spec.observations) {
      ObservedSeries series;
      series.type_name = obs.name;
      series.counts.assign(horizon, 0);
      series.mask.assign(horizon, 1);
      int masked = 0;
      if (binomial_series.count(obs.name)) {
        series.trials.assign(horizon, 0);
        const auto& pos = by_type[obs.name + "_positive"];
        const auto& tests = by_type[obs.name + "_tests"];
        for (int t = 0; t < horizon; ++t) {
          long day = min_day + t;
          auto pit = pos.find(day);
          auto nit = tests.find(day);
          if (pit == pos.end() || nit == tests.end()) {
            series.mask[t] = 0;
            ++masked;
            continue;
          }
          if (pit->second > nit->second) {
            fail(observations_path + ": " + region_name + " " + format_date(day) + " " +
                 obs.name + " has more positives than tests");
          }
          series.counts[t] = pit->second;
          series.trials[t] = nit->second;
        }
      } else {
        const auto& values = by_type[obs.name];
        for (int t = 0; t < horizon; ++t) {
          auto it = values.find(min_day + t);
          if (it == values.end()) {
            series.mask[t] = 0;
            ++masked;
          } else {
            series.counts[t] = it->second;
          }
        }
      }
      if (masked == horizon) {
        result.warnings.push_back("region " + region_name + " has no \"" + obs.name +
                                  "\" rows; the whole series is masked out");
      } else if (masked > 0) {
        result.warnings.push_back("region " + region_name + " series \"" + obs.name +
                                  "\": masked " + std::to_string(masked) +
                                  " day(s) with no row");
      }
      region.series.push_back(std::move(series));
    }
    result.regions.push_back(std::move(region));
  }

  if (!covariates_path.empty()) {
    CsvFile cov_file = read_csv(covariates_path, "region,date,name,value");
    // region -> column -> day -> value
    std::map<std::string, std::map<std::string, std::map<long, double>>> cov;
    for (const auto& row : cov_file.rows) {
      long day = parse_date(row[1]);
      double value = parse_double(row[3]);
      auto [it, inserted] = cov[row[0]][row[2]].emplace(day, value);
      if (!inserted) {
        fail(covariates_path + ": duplicate row for " + row[0] + " " + row[1] + " " + row[2]);
      }
    }
    std::set<std::string> all_columns;
    for (const auto& [region_name, by_column] : cov) {
      for (const auto& [column, days] : by_column) all_columns.insert(column);
    }
    for (auto& region : result.regions) {
      auto rit = cov.find(region.name);
      if (rit == cov.end()) {
        fail(covariates_path + " has no rows for region " + region.name);
      }
      for (const auto& column : all_columns) {
        auto cit = rit->second.find(column);
        if (cit == rit->second.end()) {
          fail(covariates_path + ": region " + region.name + " is missing column \"" +
               column + "\"");
        }
        std::vector<double> values(horizon);
        for (int t = 0; t < horizon; ++t) {
          auto dit = cit->second.find(min_day + t);
          if (dit == cit->second.end()) {
            fail(covariates_path + ": region " + region.name + " column \"" + column +
                 "\" is missing " + format_date(min_day + t));
          }
          values[t] = dit->second;
        }
        region.covariates.emplace(column, std::move(values));
      }
    }
  }

  if (!populations_path.empty()) {
    CsvFile pop_file = read_csv(populations_path, "region,population");
    std::map<std::string, double> pop;
    for (const auto& row : pop_file.rows) {
      double value = parse_double(row[1]);
      if (!(value > 0.0)) fail(populations_path + ": population for " + row[0] + " must be > 0");
      if (!pop.emplace(row[0], value).second) {
        fail(populations_path + ": duplicate region " + row[0]);
      }
    }
    for (auto& region : result.regions) {
      auto it = pop.find(region.name);
      if (it == pop.end()) fail(populations_path + " has no row for region " + region.name);
      region.population = it->second;
    }
  }

  return result;
}

}  // namespace epirenew::tool

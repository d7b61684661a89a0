#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "commands.hpp"
#include "dates.hpp"
#include "epirenew/observation.hpp"
#include "epirenew/renewal.hpp"
#include "epirenew/text_io.hpp"

namespace epirenew::tool {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

// Forward-simulates expected infections per region and writes observation
// rows in the same format the fit subcommand ingests.
int cmd_simulate(const RunConfig& config) {
  const SimulateSettings& sim = *config.simulate;
  const ModelSpec& spec = *config.model;

  std::vector<double> reproduction(static_cast<std::size_t>(sim.horizon));
  for (int t = 0; t < sim.horizon; ++t) {
    reproduction[t] = sim.reproduction.size() == 1 ? sim.reproduction[0]
                                                   : sim.reproduction[static_cast<std::size_t>(t)];
  }
  std::vector<double> seeds(static_cast<std::size_t>(spec.seeding.window), sim.seed_level);
  long start_day = parse_date(sim.start_date);

  for (const auto& obs : spec.observations) {
    if (obs.family == ObsFamily::binomial) {
      throw std::runtime_error("simulate supports count families only, not binomial series");
    }
    if (obs.ascertainment.has_value()) {
      throw std::runtime_error("simulate needs constant ascertainment for series " + obs.name);
    }
    if (sim.sample_counts && obs.family != ObsFamily::poisson && !obs.fixed_phi.has_value()) {
      throw std::runtime_error("simulate needs a fixed phi for series " + obs.name);
    }
  }

  std::filesystem::create_directories(config.output);
  auto infections_out = open_out(std::filesystem::path(config.output) / "infections.csv");
  auto observations_out = open_out(std::filesystem::path(config.output) / "observations.csv");
  infections_out << "region,t,value\n";
  observations_out << "region,date,type,value\n";

  for (std::size_t r = 0; r < sim.regions.size(); ++r) {
    Rng rng = make_stream(config.seed, static_cast<std::uint64_t>(r));
    InfectionPath path = propagate_expected(seeds, spec.seeding.seed_start(), reproduction,
                                            spec.generation, sim.population);
    for (int t = path.seed_start; t <= path.horizon(); ++t) {
      infections_out << sim.regions[r] << ',' << t << ',' << format_double(path.at(t)) << '\n';
    }
    for (const auto& obs : spec.observations) {
      double alpha = obs.constant_ascertainment.value_or(1.0);
      std::vector<double> ascertainment(static_cast<std::size_t>(sim.horizon), alpha);
      double phi = obs.fixed_phi.value_or(1.0);
      std::vector<long> counts;
      if (sim.sample_counts) {
        ObservedSeries series = simulate_observations(path, ascertainment, obs.delay,
                                                      obs.family, phi, rng);
        counts = series.counts;
      } else {
        std::vector<double> y = expected_observations(path, ascertainment, obs.delay);
        counts.reserve(y.size());
        for (double v : y) counts.push_back(std::llround(v));
      }
      for (int t = 1; t <= sim.horizon; ++t) {
        observations_out << sim.regions[r] << ',' << format_date(start_day + t - 1) << ','
                         << obs.name << ',' << counts[static_cast<std::size_t>(t - 1)] << '\n';
      }
    }
  }

  write_manifest(config, "simulate");
  std::cout << "simulate: wrote " << sim.regions.size() << " region(s) over " << sim.horizon
            << " day(s) to " << config.output << "\n";
  return 0;
}

}  // namespace epirenew::tool

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"

#ifndef EPIRENEW_VERSION
#define EPIRENEW_VERSION "0.0.0"
#endif

namespace {

using epirenew::tool::FlagOverrides;
using epirenew::tool::RunConfig;

struct CommonFlags {
  std::string config_path;
  FlagOverrides overrides;
};

void add_common(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("-c,--config", flags.config_path, "JSON config file (or a manifest.json)")
      ->required();
  sub->add_option("--seed", flags.overrides.seed, "Override the random seed");
  sub->add_option("-o,--out", flags.overrides.output, "Override the output directory");
  sub->add_option("--chains", flags.overrides.chains, "Override the number of chains");
  sub->add_option("--draws", flags.overrides.draws,
                  "Override the post-warmup draws per chain");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Renewal-equation regression models for epidemic data"};
  app.set_version_flag("--version", EPIRENEW_VERSION);
  app.require_subcommand(1);

  struct Entry {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&);
  };
  const std::vector<Entry> entries = {
      {"simulate", "Forward-simulate infections and observation counts",
       epirenew::tool::cmd_simulate},
      {"fit", "Fit the renewal regression model and write draws and summaries",
       epirenew::tool::cmd_fit},
      {"twostage", "Per-region reproduction fits, then covariate regressions ranked by WAIC",
       epirenew::tool::cmd_twostage},
      {"mediate", "Split a treatment effect into direct and mediated parts",
       epirenew::tool::cmd_mediate},
      {"verify-oracles", "Monte Carlo checks of the simulator against closed forms",
       epirenew::tool::cmd_verify},
  };

  std::vector<CommonFlags> flags(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    CLI::App* sub = app.add_subcommand(entries[i].name, entries[i].help);
    add_common(sub, flags[i]);
  }

  CLI11_PARSE(app, argc, argv);

  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!app.get_subcommand(entries[i].name)->parsed()) continue;
    try {
      RunConfig config =
          epirenew::tool::load_config(flags[i].config_path, entries[i].name, flags[i].overrides);
      return entries[i].run(config);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 1;
}

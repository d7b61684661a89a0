#include "config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "epirenew/lag_density.hpp"

#ifndef EPIRENEW_VERSION
#define EPIRENEW_VERSION "0.0.0"
#endif

namespace epirenew::tool {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("config: " + msg); }

void check_keys(const json& j, const std::string& context,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(context + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) fail("unknown key \"" + key + "\" in " + context);
  }
}

DiscretePmf parse_pmf(const json& j, const std::string& context, bool generation) {
  check_keys(j, context, {"weights", "family", "a", "b", "max_lag", "path"});
  if (j.contains("path")) {
    if (j.size() != 1) fail(context + ": \"path\" excludes other keys");
    return DiscretePmf::load(j.at("path").get<std::string>());
  }
  if (j.contains("weights")) {
    if (j.size() != 1) fail(context + ": \"weights\" excludes other keys");
    auto w = j.at("weights").get<std::vector<double>>();
    return generation ? DiscretePmf::normalized_generation(std::move(w))
                      : DiscretePmf::normalized_delay(std::move(w));
  }
  for (const char* k : {"family", "a", "b", "max_lag"}) {
    if (!j.contains(k)) fail(context + " needs \"" + k + "\"");
  }
  ContinuousLagDensity density(lag_family_from_string(j.at("family").get<std::string>()),
                               j.at("a").get<double>(), j.at("b").get<double>());
  int max_lag = j.at("max_lag").get<int>();
  DiscretizeResult r = generation ? discretize_generation(density, max_lag)
                                  : discretize_delay(density, max_lag);
  return r.pmf;
}

PoolingMode parse_pooling(const std::string& name, const std::string& context) {
  if (name == "fixed") return PoolingMode::fixed;
  if (name == "grouped") return PoolingMode::grouped;
  if (name == "fixed_and_grouped") return PoolingMode::fixed_and_grouped;
  fail(context + ": unknown pooling \"" + name + "\"");
}

DesignSpec parse_design(const json& j, const std::string& context) {
  check_keys(j, context,
             {"link", "scaled_logit_upper", "intercept", "intercept_pooling",
              "intercept_prior_mean", "intercept_prior_sd", "terms", "walk",
              "pooled_sd_prior_scale", "lkj_eta", "horseshoe", "standardize_continuous"});
  DesignSpec d;
  double upper = j.value("scaled_logit_upper", 6.0);
  d.link = LinkFunction::from_string(j.value("link", std::string("log")), upper);
  d.intercept = j.value("intercept", true);
  d.intercept_pooling =
      parse_pooling(j.value("intercept_pooling", std::string("fixed")), context);
  d.intercept_prior_mean = j.value("intercept_prior_mean", 0.0);
  d.intercept_prior_sd = j.value("intercept_prior_sd", 1.0);
  d.pooled_sd_prior_scale = j.value("pooled_sd_prior_scale", 0.5);
  d.lkj_eta = j.value("lkj_eta", 1.0);
  d.standardize_continuous = j.value("standardize_continuous", true);
  if (j.contains("horseshoe")) {
    const json& h = j.at("horseshoe");
    check_keys(h, context + ".horseshoe", {"global_scale", "slab_scale"});
    d.horseshoe.global_scale = h.value("global_scale", 1.0);
    d.horseshoe.slab_scale = h.value("slab_scale", 2.5);
  }
  if (j.contains("terms")) {
    for (const auto& tj : j.at("terms")) {
      check_keys(tj, context + ".terms[]", {"name", "pooling", "prior", "prior_sd"});
      CovariateTerm term;
      term.name = tj.at("name").get<std::string>();
      term.pooling = parse_pooling(tj.value("pooling", std::string("fixed")), context);
      std::string prior = tj.value("prior", std::string("normal"));
      if (prior == "normal") {
        term.prior = CoefficientPrior::normal;
      } else if (prior == "shrinkage") {
        term.prior = CoefficientPrior::shrinkage;
      } else {
        fail(context + ": unknown prior \"" + prior + "\"");
      }
      term.prior_sd = tj.value("prior_sd", 0.5);
      d.terms.push_back(std::move(term));
    }
  }
  if (j.contains("walk")) {
    const json& w = j.at("walk");
    check_keys(w, context + ".walk", {"timescale", "per_group", "scale_prior_sd"});
    RandomWalkTerm walk;
    std::string ts = w.value("timescale", std::string("weekly"));
    if (ts == "daily") {
      walk.timescale = WalkTimescale::daily;
    } else if (ts == "weekly") {
      walk.timescale = WalkTimescale::weekly;
    } else {
      fail(context + ".walk: unknown timescale \"" + ts + "\"");
    }
    walk.per_group = w.value("per_group", true);
    walk.scale_prior_sd = w.value("scale_prior_sd", 0.2);
    d.walk = walk;
  }
  return d;
}

ObservationModelSpec parse_observation(const json& j, const std::string& context) {
  check_keys(j, context, {"name", "family", "delay", "phi", "ascertainment"});
  ObservationModelSpec obs;
  obs.name = j.at("name").get<std::string>();
  obs.family = obs_family_from_string(j.value("family", std::string("neg_binomial")));
  obs.delay = parse_pmf(j.at("delay"), context + ".delay", false);
  if (j.contains("phi")) {
    const json& p = j.at("phi");
    check_keys(p, context + ".phi", {"fixed", "prior_scale"});
    if (p.contains("fixed") == p.contains("prior_scale")) {
      fail(context + ".phi needs exactly one of \"fixed\" or \"prior_scale\"");
    }
    if (p.contains("fixed")) {
      obs.fixed_phi = p.at("fixed").get<double>();
    } else {
      obs.phi_prior_scale = p.at("prior_scale").get<double>();
    }
  }
  if (j.contains("ascertainment")) {
    const json& a = j.at("ascertainment");
    check_keys(a, context + ".ascertainment", {"constant", "design"});
    if (a.contains("constant") == a.contains("design")) {
      fail(context + ".ascertainment needs exactly one of \"constant\" or \"design\"");
    }
    if (a.contains("constant")) {
      obs.constant_ascertainment = a.at("constant").get<double>();
    } else {
      obs.ascertainment = parse_design(a.at("design"), context + ".ascertainment.design");
    }
  } else if (obs.family != ObsFamily::binomial) {
    obs.constant_ascertainment = 1.0;
  }
  return obs;
}

SeedingConfig parse_seeding(const json& j, const std::string& context) {
  check_keys(j, context, {"window", "level_prior_mean", "level_prior_sd", "daily_noise_sd"});
  SeedingConfig s;
  s.window = j.value("window", 6);
  s.level_prior_mean = j.value("level_prior_mean", 0.0);
  s.level_prior_sd = j.value("level_prior_sd", 1.0);
  s.daily_noise_sd = j.value("daily_noise_sd", 0.0);
  return s;
}

ModelSpec parse_model(const json& j, bool transmission_required) {
  check_keys(j, "model",
             {"mode", "latent_family", "dispersion", "population_adjustment", "generation",
              "seeding", "transmission", "observations"});
  ModelSpec spec;
  std::string mode = j.value("mode", std::string("basic"));
  if (mode == "basic") {
    spec.mode = ModelMode::basic;
  } else if (mode == "latent") {
    spec.mode = ModelMode::latent;
  } else {
    fail("model.mode must be \"basic\" or \"latent\"");
  }
  spec.latent_family = lag_family_from_string(j.value("latent_family", std::string("gamma")));
  if (j.contains("dispersion")) {
    const json& d = j.at("dispersion");
    check_keys(d, "model.dispersion", {"fixed", "prior_scale"});
    if (d.contains("fixed") == d.contains("prior_scale")) {
      fail("model.dispersion needs exactly one of \"fixed\" or \"prior_scale\"");
    }
    if (d.contains("fixed")) {
      spec.fixed_dispersion = d.at("fixed").get<double>();
    } else {
      spec.dispersion_prior_scale = d.at("prior_scale").get<double>();
    }
  }
  spec.population_adjustment = j.value("population_adjustment", false);
  if (!j.contains("generation")) fail("model needs \"generation\"");
  spec.generation = parse_pmf(j.at("generation"), "model.generation", true);
  if (j.contains("seeding")) spec.seeding = parse_seeding(j.at("seeding"), "model.seeding");
  if (j.contains("transmission")) {
    spec.transmission = parse_design(j.at("transmission"), "model.transmission");
  } else if (transmission_required) {
    fail("model needs \"transmission\" for this subcommand");
  }
  if (!j.contains("observations") || !j.at("observations").is_array() ||
      j.at("observations").empty()) {
    fail("model needs a nonempty \"observations\" array");
  }
  int idx = 0;
  for (const auto& oj : j.at("observations")) {
    spec.observations.push_back(
        parse_observation(oj, "model.observations[" + std::to_string(idx) + "]"));
    ++idx;
  }
  return spec;
}

SamplerConfig parse_sampler(const json& j, const std::string& context) {
  check_keys(j, context,
             {"algorithm", "chains", "warmup", "draws", "adapt_delta", "max_depth", "threads"});
  SamplerConfig s;
  s.algorithm = sampler_algorithm_from_string(j.value("algorithm", std::string("nuts")));
  s.chains = j.value("chains", 4);
  s.warmup = j.value("warmup", 1000);
  s.draws = j.value("draws", 1000);
  s.adapt_delta = j.value("adapt_delta", 0.8);
  s.max_depth = j.value("max_depth", 10);
  s.threads = j.value("threads", 0);
  return s;
}

SimulateSettings parse_simulate(const json& j) {
  check_keys(j, "simulate",
             {"horizon", "regions", "reproduction", "seed_level", "population",
              "sample_counts", "start_date"});
  SimulateSettings s;
  s.horizon = j.value("horizon", 0);
  if (s.horizon < 1) fail("simulate.horizon must be >= 1");
  s.regions = j.value("regions", std::vector<std::string>{"sim"});
  if (s.regions.empty()) fail("simulate.regions must not be empty");
  if (!j.contains("reproduction")) fail("simulate needs \"reproduction\"");
  const json& r = j.at("reproduction");
  if (r.is_number()) {
    s.reproduction = {r.get<double>()};
  } else {
    s.reproduction = r.get<std::vector<double>>();
  }
  if (s.reproduction.empty()) fail("simulate.reproduction must not be empty");
  if (static_cast<int>(s.reproduction.size()) != 1 &&
      static_cast<int>(s.reproduction.size()) != s.horizon) {
    fail("simulate.reproduction must have one value or one per day");
  }
  s.seed_level = j.value("seed_level", 1.0);
  if (j.contains("population")) s.population = j.at("population").get<double>();
  s.sample_counts = j.value("sample_counts", true);
  s.start_date = j.value("start_date", std::string("2020-01-01"));
  return s;
}

TwoStageSettings parse_twostage(const json& j) {
  check_keys(j, "twostage",
             {"variants", "rhat_gate", "stage2_sampler", "stage2_sigma_prior_scale",
              "horseshoe"});
  TwoStageSettings s;
  if (!j.contains("variants") || !j.at("variants").is_array() || j.at("variants").empty()) {
    fail("twostage needs a nonempty \"variants\" array");
  }
  for (const auto& vj : j.at("variants")) {
    check_keys(vj, "twostage.variants[]", {"name", "covariates"});
    TwoStageVariant v;
    v.name = vj.at("name").get<std::string>();
    v.covariates = vj.at("covariates").get<std::vector<std::string>>();
    s.variants.push_back(std::move(v));
  }
  s.rhat_gate = j.value("rhat_gate", 1.05);
  if (j.contains("stage2_sampler")) {
    s.stage2_sampler = parse_sampler(j.at("stage2_sampler"), "twostage.stage2_sampler");
  }
  s.stage2_sigma_prior_scale = j.value("stage2_sigma_prior_scale", 1.0);
  if (j.contains("horseshoe")) {
    const json& h = j.at("horseshoe");
    check_keys(h, "twostage.horseshoe", {"global_scale", "slab_scale"});
    s.horseshoe.global_scale = h.value("global_scale", 1.0);
    s.horseshoe.slab_scale = h.value("slab_scale", 2.5);
  }
  return s;
}

MediationSettings parse_mediation(const json& j) {
  check_keys(j, "mediation",
             {"treatment", "mediator", "intercept_prior_sd", "effect_prior_sd",
              "walk_scale_prior_sd"});
  MediationSettings s;
  if (!j.contains("treatment") || !j.contains("mediator")) {
    fail("mediation needs \"treatment\" and \"mediator\"");
  }
  s.treatment = j.at("treatment").get<std::string>();
  s.mediator = j.at("mediator").get<std::string>();
  s.intercept_prior_sd = j.value("intercept_prior_sd", 1.0);
  s.effect_prior_sd = j.value("effect_prior_sd", 0.5);
  s.walk_scale_prior_sd = j.value("walk_scale_prior_sd", 0.2);
  return s;
}

VerifySettings parse_verify(const json& j) {
  check_keys(j, "verify",
             {"lemma_runs", "dispersion_runs", "observation_runs", "consistency_runs"});
  VerifySettings s;
  s.lemma_runs = j.value("lemma_runs", 100000);
  s.dispersion_runs = j.value("dispersion_runs", 100000);
  s.observation_runs = j.value("observation_runs", 200);
  s.consistency_runs = j.value("consistency_runs", 10000);
  return s;
}

}  // namespace

RunConfig load_config(const std::string& path, const std::string& subcommand,
                      const FlagOverrides& overrides) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(path + " is not valid JSON: " + e.what());
  }
  // a manifest wraps the config it ran with; unwrap for bitwise reruns
  if (j.is_object() && j.contains("config") && j.contains("subcommand")) {
    j = j.at("config");
  }
  check_keys(j, "top level",
             {"schema_version", "data", "model", "sampler", "seed", "output", "simulate",
              "twostage", "mediation", "verify"});
  if (!j.contains("schema_version") || j.at("schema_version").get<int>() != 1) {
    fail("schema_version must be 1");
  }

  if (overrides.seed.has_value()) j["seed"] = *overrides.seed;
  if (overrides.output.has_value()) j["output"] = *overrides.output;
  if (overrides.chains.has_value() || overrides.draws.has_value()) {
    if (!j.contains("sampler")) j["sampler"] = json::object();
    if (overrides.chains.has_value()) j["sampler"]["chains"] = *overrides.chains;
    if (overrides.draws.has_value()) j["sampler"]["draws"] = *overrides.draws;
  }

  RunConfig config;
  config.raw = j;
  config.seed = j.value("seed", std::uint64_t{1});
  config.output = j.value("output", std::string("out"));
  if (j.contains("data")) {
    const json& d = j.at("data");
    check_keys(d, "data", {"observations", "covariates", "populations"});
    config.observations_path = d.value("observations", std::string());
    config.covariates_path = d.value("covariates", std::string());
    config.populations_path = d.value("populations", std::string());
  }
  if (j.contains("sampler")) config.sampler = parse_sampler(j.at("sampler"), "sampler");
  config.sampler.seed = config.seed;

  const bool needs_model = subcommand == "fit" || subcommand == "simulate" ||
                           subcommand == "twostage" || subcommand == "mediate";
  if (j.contains("model")) {
    bool transmission_required = subcommand == "fit" || subcommand == "twostage";
    config.model = parse_model(j.at("model"), transmission_required);
  } else if (needs_model) {
    fail("subcommand " + subcommand + " needs a \"model\" section");
  }

  if (subcommand == "simulate") {
    if (!j.contains("simulate")) fail("subcommand simulate needs a \"simulate\" section");
    config.simulate = parse_simulate(j.at("simulate"));
  }
  if (subcommand == "twostage") {
    if (!j.contains("twostage")) fail("subcommand twostage needs a \"twostage\" section");
    config.twostage = parse_twostage(j.at("twostage"));
  }
  if (subcommand == "mediate") {
    if (!j.contains("mediation")) fail("subcommand mediate needs a \"mediation\" section");
    config.mediation = parse_mediation(j.at("mediation"));
  }
  if (j.contains("verify")) config.verify = parse_verify(j.at("verify"));
  return config;
}

std::string config_hash(const nlohmann::json& canonical) {
  // FNV-1a over the sorted-key dump
  std::string text = canonical.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_manifest(const RunConfig& config, const std::string& subcommand) {
  namespace fs = std::filesystem;
  fs::create_directories(config.output);
  nlohmann::json manifest;
  manifest["schema_version"] = 1;
  manifest["subcommand"] = subcommand;
  manifest["seed"] = config.seed;
  manifest["version"] = EPIRENEW_VERSION;
  manifest["config_hash"] = config_hash(config.raw);
  manifest["config"] = config.raw;
  std::ofstream out(fs::path(config.output) / "manifest.json");
  if (!out) fail("cannot write manifest.json in " + config.output);
  out << manifest.dump(2) << '\n';
}

}  // namespace epirenew::tool

// fairsel: selection under differential variance from the command line.
//
//   fairsel analyze  --mu 1 --eta 1 --sigma-a 3 --sigma-b 0.2 --p-a 0.4 --alpha 0.01:0.99:99
//   fairsel simulate --n 100 --m 10:100:10 --K 10000 --seed 7
//   fairsel dataset  --csv scores.csv --group-map F=A,M=B --sigma 10 --k 1,4,7,10
//   fairsel bounds   --alpha 0.25 --gamma 1
//
// Exit codes: 0 success, 1 runtime or numerical failure, 2 configuration error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <type_traits>
#include <vector>

#include "CLI11.hpp"

#include "fairsel/cli.hpp"

namespace {

using fairsel::cli::RunConfig;

struct Flags {
  std::string config_path;
  std::string model_path;
  std::string output;
  std::map<std::string, double> scalars;  // model and numeric overrides by flag name
  std::map<std::string, std::string> strings;
  std::map<std::string, CLI::Option*> options;
};

void add_scalar(CLI::App* app, Flags& f, const std::string& flag, const std::string& help) {
  f.options[flag] = app->add_option("--" + flag, f.scalars[flag], help);
}

void add_string(CLI::App* app, Flags& f, const std::string& flag, const std::string& help) {
  f.options[flag] = app->add_option("--" + flag, f.strings[flag], help);
}

bool given(const Flags& f, const std::string& flag) {
  const auto it = f.options.find(flag);
  return it != f.options.end() && it->second->count() > 0;
}

void add_model_flags(CLI::App* app, Flags& f) {
  add_scalar(app, f, "mu", "latent mean for both groups");
  add_scalar(app, f, "mu-a", "latent mean, group A");
  add_scalar(app, f, "mu-b", "latent mean, group B");
  add_scalar(app, f, "eta", "latent standard deviation for both groups");
  add_scalar(app, f, "eta-a", "latent standard deviation, group A");
  add_scalar(app, f, "eta-b", "latent standard deviation, group B");
  add_scalar(app, f, "beta-a", "estimator bias, group A");
  add_scalar(app, f, "beta-b", "estimator bias, group B");
  add_scalar(app, f, "sigma-a", "estimator noise, group A");
  add_scalar(app, f, "sigma-b", "estimator noise, group B");
  add_scalar(app, f, "p-a", "fraction of group-A candidates");
  f.options["model"] = app->add_option("--model", f.model_path, "model JSON file");
}

void add_common_flags(CLI::App* app, Flags& f) {
  f.options["config"] =
      app->add_option("--config", f.config_path, "config JSON, or an earlier output to rerun");
  add_string(app, f, "format", "json or csv");
  f.options["output"] = app->add_option("--output,-o", f.output, "output path (default stdout)");
  add_scalar(app, f, "gamma", "gamma-rule level in [0, 1]");
  add_string(app, f, "algorithms", "comma list: oblivious,bayesian,gamma_oblivious,gamma_bayesian,"
                                   "demographic_parity (or all)");
}

// Defaults, then --config, then --model, then individual flags.
RunConfig resolve(fairsel::cli::Command command, const Flags& f) {
  using namespace fairsel;
  RunConfig c;
  c.command = command;
  if (command == cli::Command::dataset) {
    c.alpha = "0.02:1:50";
    c.gamma = 1.0;
    c.model = PopulationModel({0, 1, 0, 0}, {0, 1, 0, 0}, 0.5);
  }
  if (!f.config_path.empty()) {
    io::json j = cli::read_config_file(f.config_path);
    if (j.contains("command") && j.at("command") != cli::to_string(command)) {
      throw configuration_error("config is for '" + j.at("command").get<std::string>() +
                                "', not '" + cli::to_string(command) + "'");
    }
    c = cli::config_from_json(j, c);
  }
  if (!f.model_path.empty()) {
    std::ifstream in(f.model_path);
    if (!in) throw configuration_error("cannot open model '" + f.model_path + "'");
    io::json j;
    try {
      j = io::json::parse(in);
    } catch (const io::json::parse_error& e) {
      throw schema_error("model file is not valid JSON: " + std::string(e.what()));
    }
    c.model = io::model_from_json(j, c.model);
  }

  GroupParams a = c.model.a();
  GroupParams b = c.model.b();
  double p_a = c.model.p_a();
  auto scalar = [&](const char* flag, double& target) {
    if (given(f, flag)) target = f.scalars.at(flag);
  };
  scalar("mu", a.mu);
  scalar("mu", b.mu);
  scalar("mu-a", a.mu);
  scalar("mu-b", b.mu);
  scalar("eta", a.eta);
  scalar("eta", b.eta);
  scalar("eta-a", a.eta);
  scalar("eta-b", b.eta);
  scalar("beta-a", a.beta);
  scalar("beta-b", b.beta);
  scalar("sigma-a", a.sigma);
  scalar("sigma-b", b.sigma);
  scalar("p-a", p_a);
  try {
    c.model = PopulationModel(a, b, p_a);
  } catch (const error& e) {
    throw configuration_error(std::string("invalid model: ") + e.what());
  }

  scalar("gamma", c.gamma);
  if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) throw configuration_error("gamma must lie in [0, 1]");
  if (given(f, "alpha")) c.alpha = f.strings.at("alpha");
  if (given(f, "algorithms")) c.algorithms = cli::parse_algorithms(f.strings.at("algorithms"));
  if (given(f, "format")) {
    const auto& v = f.strings.at("format");
    if (v != "json" && v != "csv") throw configuration_error("--format must be json or csv");
    c.format = v == "json" ? cli::Format::json : cli::Format::csv;
  }
  auto count = [&](const char* flag, auto& target) {
    if (!given(f, flag)) return;
    const double v = f.scalars.at(flag);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) {
      throw configuration_error(std::string("--") + flag + " must be a non-negative integer");
    }
    target = static_cast<std::decay_t<decltype(target)>>(v);
  };
  count("n", c.n);
  count("K", c.K);
  count("seed", c.seed);
  if (given(f, "m")) c.m = f.strings.at("m");
  if (given(f, "prior-a")) c.prior_a = f.strings.at("prior-a");
  if (given(f, "prior-b")) c.prior_b = f.strings.at("prior-b");
  if (given(f, "scoring")) {
    const auto s = mc::parse_scoring(f.strings.at("scoring"));
    if (!s) throw configuration_error("--scoring must be auto, closed_form, quadrature or plugin");
    c.scoring = *s;
  }
  if (given(f, "csv")) c.csv = f.strings.at("csv");
  if (given(f, "id-col")) c.schema.id_col = f.strings.at("id-col");
  if (given(f, "group-col")) c.schema.group_col = f.strings.at("group-col");
  if (given(f, "quality-col")) c.schema.quality_col = f.strings.at("quality-col");
  if (given(f, "group-map")) c.group_map = f.strings.at("group-map");
  scalar("sigma", c.sigma);
  if (given(f, "scaled-group")) {
    const auto& g = f.strings.at("scaled-group");
    if (g != "A" && g != "B") throw configuration_error("--scaled-group must be A or B");
    c.scaled_group = g == "A" ? Group::A : Group::B;
  }
  if (given(f, "k")) c.k_values = cli::parse_grid(f.strings.at("k"), "k");
  return c;
}

void emit(const fairsel::cli::RunOutput& out, const std::string& path) {
  for (const auto& w : out.warnings) std::cerr << "fairsel: warning: " << w << '\n';
  if (path.empty()) {
    std::cout << out.text << std::flush;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw fairsel::configuration_error("cannot write '" + path + "'");
  file << out.text;
  if (!file) throw fairsel::error("failed writing '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  using fairsel::cli::Command;
  CLI::App app{"Selection under differential variance"};
  app.set_version_flag("--version", std::string("fairsel ") + fairsel::cli::tool_version);
  app.require_subcommand(1);

  std::map<Command, Flags> flags;
  std::map<Command, CLI::App*> subs;
  auto make = [&](Command c, const char* help) {
    auto* sub = app.add_subcommand(fairsel::cli::to_string(c), help);
    subs[c] = sub;
    Flags& f = flags[c];
    add_common_flags(sub, f);
    return std::pair<CLI::App*, Flags*>{sub, &f};
  };

  {
    auto [sub, f] = make(Command::analyze, "large-population curves over a budget grid");
    add_model_flags(sub, *f);
    add_string(sub, *f, "alpha", "budget: value, list, or lo:hi:steps");
  }
  {
    auto [sub, f] = make(Command::simulate, "finite-population Monte Carlo replications");
    add_model_flags(sub, *f);
    add_scalar(sub, *f, "n", "candidates per cohort");
    add_string(sub, *f, "m", "selection sizes: value, list, or lo:hi:steps");
    add_scalar(sub, *f, "K", "replications");
    add_scalar(sub, *f, "seed", "master seed");
    add_string(sub, *f, "prior-a", "quality prior for group A (normal, uniform:lo:hi, beta:a:b, "
                                   "pareto:scale:shape)");
    add_string(sub, *f, "prior-b", "quality prior for group B");
    add_string(sub, *f, "scoring", "posterior scoring: auto, closed_form, quadrature, plugin");
  }
  {
    auto [sub, f] = make(Command::dataset, "selection experiment on a CSV of scores");
    add_string(sub, *f, "csv", "input CSV path");
    add_string(sub, *f, "id-col", "id column name");
    add_string(sub, *f, "group-col", "group label column name");
    add_string(sub, *f, "quality-col", "quality column name");
    add_string(sub, *f, "group-map", "label mapping, e.g. F=A,M=B");
    add_string(sub, *f, "alpha", "budget: value, list, or lo:hi:steps; 1 allowed");
    add_scalar(sub, *f, "sigma", "noise standard deviation of the unscaled group");
    add_string(sub, *f, "scaled-group", "group whose noise is k * sigma (A or B)");
    add_string(sub, *f, "k", "noise ratios: value, list, or lo:hi:steps");
    add_scalar(sub, *f, "beta-a", "estimator bias, group A");
    add_scalar(sub, *f, "beta-b", "estimator bias, group B");
    add_scalar(sub, *f, "seed", "noise seed");
  }
  {
    auto [sub, f] = make(Command::bounds, "crossover budgets, improvement region, cost bounds");
    add_model_flags(sub, *f);
    add_string(sub, *f, "alpha", "budget: value, list, or lo:hi:steps");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (auto& [command, sub] : subs) {
      if (!sub->parsed()) continue;
      auto& f = flags[command];
      const RunConfig config = resolve(command, f);
      emit(fairsel::cli::run(config), f.output);
    }
  } catch (const fairsel::configuration_error& e) {
    std::cerr << "fairsel: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fairsel: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

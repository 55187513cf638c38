#pragma once

// Run configuration for the fairsel command-line tool and the four commands
// it drives. Each command renders its whole output into a string, headed by
// the tool version and the resolved configuration, so that feeding that
// configuration back reproduces the output byte for byte.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fairsel/asymptotic.hpp"
#include "fairsel/dataset.hpp"
#include "fairsel/errors.hpp"
#include "fairsel/io.hpp"
#include "fairsel/model.hpp"
#include "fairsel/montecarlo.hpp"
#include "fairsel/prior.hpp"
#include "fairsel/records.hpp"

namespace fairsel::cli {


inline constexpr const char* tool_version = "0.1.0";

enum class Command { analyze, simulate, dataset, bounds };
enum class Format { json, csv };

[[nodiscard]] inline const char* to_string(Command c) noexcept {
  switch (c) {
    case Command::analyze: return "analyze";
    case Command::simulate: return "simulate";
    case Command::dataset: return "dataset";
    case Command::bounds: return "bounds";
  }
  return "?";
}

[[nodiscard]] inline Command parse_command(std::string_view s) {
  if (s == "analyze") return Command::analyze;
  if (s == "simulate") return Command::simulate;
  if (s == "dataset") return Command::dataset;
  if (s == "bounds") return Command::bounds;
  throw configuration_error("unknown command '" + std::string(s) + "'");
}

struct RunConfig {
  Command command = Command::analyze;
  PopulationModel model = symmetric_model(1.0, 1.0, 3.0, 0.2, 0.4);
  std::string alpha = "0.01:0.99:99";
  double gamma = 0.8;
  std::vector<Algorithm> algorithms{std::begin(all_algorithms), std::end(all_algorithms)};
  Format format = Format::json;

  // simulate
  std::size_t n = 100;
  std::string m = "10:100:10";
  std::size_t K = 1000;
  std::uint64_t seed = 1;
  std::string prior_a = "normal";
  std::string prior_b = "normal";
  mc::Scoring scoring = mc::Scoring::automatic;

  // dataset
  std::string csv;
  data::Schema schema;
  std::string group_map = "A=A,B=B";
  double sigma = 1.0;
  Group scaled_group = Group::A;
  std::vector<double> k_values{1.0};
};

// ---- grid and list parsing -----------------------------------------------

namespace detail {

inline double parse_number(std::string_view s, std::string_view what) {
  double v = 0.0;
  if (!data::detail::parse_double(s, v)) {
    throw configuration_error(std::string(what) + ": '" + std::string(s) + "' is not a number");
  }
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) return out;
    pos = next + 1;
  }
}

}  // namespace detail

// "x", "x1,x2,...", or "lo:hi:steps" (steps points, ends included).
[[nodiscard]] inline std::vector<double> parse_grid(std::string_view spec, std::string_view what) {
  if (spec.find(':') != std::string_view::npos) {
    const auto parts = detail::split(spec, ':');
    if (parts.size() != 3) {
      throw configuration_error(std::string(what) + ": grid '" + std::string(spec) +
                                "' must be lo:hi:steps");
    }
    const double lo = detail::parse_number(parts[0], what);
    const double hi = detail::parse_number(parts[1], what);
    const double steps = detail::parse_number(parts[2], what);
    if (steps < 1.0 || steps != std::floor(steps) || steps > 1e7) {
      throw configuration_error(std::string(what) + ": step count must be a positive integer");
    }
    if (hi < lo) throw configuration_error(std::string(what) + ": grid has hi < lo");
    return linear_grid(lo, hi, static_cast<std::size_t>(steps));
  }
  std::vector<double> out;
  for (auto part : detail::split(spec, ',')) out.push_back(detail::parse_number(part, what));
  return out;
}

[[nodiscard]] inline std::vector<double> budget_grid(std::string_view spec, bool allow_one) {
  auto grid = parse_grid(spec, "alpha");
  for (double a : grid) {
    if (!(a > 0.0 && (a < 1.0 || (allow_one && a == 1.0)))) {
      throw configuration_error(std::string("alpha values must lie in (0, 1") +
                                (allow_one ? "]" : ")") + ", got " + io::format_number(a));
    }
  }
  return grid;
}

[[nodiscard]] inline std::vector<std::size_t> size_list(std::string_view spec, std::size_t n) {
  std::vector<std::size_t> out;
  for (double v : parse_grid(spec, "m")) {
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-9 || r < 1.0 || r > static_cast<double>(n)) {
      throw configuration_error("m values must be integers in [1, n]; got " + io::format_number(v));
    }
    out.push_back(static_cast<std::size_t>(r));
  }
  return out;
}

// "normal" (from the model's mu/eta), "uniform:lo:hi", "beta:a:b", "pareto:scale:shape".
[[nodiscard]] inline QualityPrior parse_prior(std::string_view spec, const GroupParams& g) {
  const auto parts = detail::split(spec, ':');
  const auto name = parts[0];
  auto arg = [&](std::size_t i) { return detail::parse_number(parts[i], "prior"); };
  try {
    if (name == "normal" && parts.size() == 1) return NormalPrior{g.mu, g.eta};
    if (name == "normal" && parts.size() == 3) return NormalPrior{arg(1), arg(2)};
    if (name == "uniform" && parts.size() == 3) return UniformPrior{arg(1), arg(2)};
    if (name == "beta" && parts.size() == 3) return BetaPrior{arg(1), arg(2)};
    if (name == "pareto" && parts.size() == 3) return ParetoPrior{arg(1), arg(2)};
  } catch (const domain_error& e) {
    throw configuration_error(std::string("prior '") + std::string(spec) + "': " + e.what());
  }
  throw configuration_error("prior '" + std::string(spec) +
                            "' must be normal, normal:mu:eta, uniform:lo:hi, beta:a:b or "
                            "pareto:scale:shape");
}

[[nodiscard]] inline std::vector<Algorithm> parse_algorithms(std::string_view spec) {
  std::vector<Algorithm> out;
  for (auto part : detail::split(spec, ',')) {
    if (part == "all") {
      out.insert(out.end(), std::begin(all_algorithms), std::end(all_algorithms));
      continue;
    }
    const auto a = parse_algorithm(part);
    if (!a) throw configuration_error("unknown algorithm '" + std::string(part) + "'");
    out.push_back(*a);
  }
  if (out.empty()) throw configuration_error("no algorithms given");
  return out;
}

// ---- configuration JSON --------------------------------------------------

[[nodiscard]] inline io::json to_json(const RunConfig& c) {
  io::json j;
  j["command"] = to_string(c.command);
  io::json algs = io::json::array();
  for (auto a : c.algorithms) algs.push_back(fairsel::to_string(a));
  switch (c.command) {
    case Command::analyze:
    case Command::bounds:
      j["model"] = io::model_to_json(c.model);
      j["alpha"] = c.alpha;
      j["gamma"] = c.gamma;
      if (c.command == Command::analyze) j["algorithms"] = algs;
      break;
    case Command::simulate:
      j["model"] = io::model_to_json(c.model);
      j["gamma"] = c.gamma;
      j["algorithms"] = algs;
      j["n"] = c.n;
      j["m"] = c.m;
      j["K"] = c.K;
      j["seed"] = c.seed;
      j["prior_a"] = c.prior_a;
      j["prior_b"] = c.prior_b;
      j["scoring"] = mc::to_string(c.scoring);
      break;
    case Command::dataset:
      j["csv"] = c.csv;
      j["id_col"] = c.schema.id_col;
      j["group_col"] = c.schema.group_col;
      j["quality_col"] = c.schema.quality_col;
      j["group_map"] = c.group_map;
      j["alpha"] = c.alpha;
      j["gamma"] = c.gamma;
      j["algorithms"] = algs;
      j["sigma"] = c.sigma;
      j["scaled_group"] = fairsel::to_string(c.scaled_group);
      j["beta_a"] = c.model.a().beta;
      j["beta_b"] = c.model.b().beta;
      j["k"] = c.k_values;
      j["seed"] = c.seed;
      break;
  }
  j["format"] = c.format == Format::json ? "json" : "csv";
  return j;
}

namespace detail {

template <class T>
T get_as(const io::json& j, const char* key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const io::json::exception&) {
    throw schema_error(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace detail

// Applies the keys present in `j` on top of `base`.
[[nodiscard]] inline RunConfig config_from_json(const io::json& j, RunConfig base = {}) {
  if (!j.is_object()) throw schema_error("config must be a JSON object");
  static constexpr std::string_view known[] = {
      "command", "model",     "alpha",       "gamma",  "algorithms", "n",           "m",
      "K",       "seed",      "prior_a",     "prior_b", "scoring",   "csv",         "id_col",
      "group_col", "quality_col", "group_map", "sigma", "scaled_group", "beta_a",   "beta_b",
      "k",       "format"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw schema_error("unknown config key '" + key + "'");
    }
  }
  RunConfig c = std::move(base);
  if (j.contains("command")) c.command = parse_command(detail::get_as<std::string>(j, "command", ""));
  if (j.contains("model")) c.model = io::model_from_json(j.at("model"), c.model);
  c.alpha = detail::get_as(j, "alpha", c.alpha);
  c.gamma = detail::get_as(j, "gamma", c.gamma);
  if (j.contains("algorithms")) {
    c.algorithms.clear();
    for (const auto& a : j.at("algorithms")) {
      const auto alg = parse_algorithm(a.get<std::string>());
      if (!alg) throw schema_error("unknown algorithm '" + a.get<std::string>() + "'");
      c.algorithms.push_back(*alg);
    }
  }
  c.n = detail::get_as(j, "n", c.n);
  c.m = detail::get_as(j, "m", c.m);
  c.K = detail::get_as(j, "K", c.K);
  c.seed = detail::get_as(j, "seed", c.seed);
  c.prior_a = detail::get_as(j, "prior_a", c.prior_a);
  c.prior_b = detail::get_as(j, "prior_b", c.prior_b);
  if (j.contains("scoring")) {
    const auto s = mc::parse_scoring(detail::get_as<std::string>(j, "scoring", ""));
    if (!s) throw schema_error("unknown scoring mode");
    c.scoring = *s;
  }
  c.csv = detail::get_as(j, "csv", c.csv);
  c.schema.id_col = detail::get_as(j, "id_col", c.schema.id_col);
  c.schema.group_col = detail::get_as(j, "group_col", c.schema.group_col);
  c.schema.quality_col = detail::get_as(j, "quality_col", c.schema.quality_col);
  c.group_map = detail::get_as(j, "group_map", c.group_map);
  c.sigma = detail::get_as(j, "sigma", c.sigma);
  if (j.contains("scaled_group")) {
    const auto g = detail::get_as<std::string>(j, "scaled_group", "");
    if (g != "A" && g != "B") throw schema_error("scaled_group must be A or B");
    c.scaled_group = g == "A" ? Group::A : Group::B;
  }
  if (j.contains("beta_a") || j.contains("beta_b")) {
    GroupParams a = c.model.a();
    GroupParams b = c.model.b();
    a.beta = detail::get_as(j, "beta_a", a.beta);
    b.beta = detail::get_as(j, "beta_b", b.beta);
    c.model = PopulationModel(a, b, c.model.p_a());
  }
  c.k_values = detail::get_as(j, "k", c.k_values);
  if (j.contains("format")) {
    const auto f = detail::get_as<std::string>(j, "format", "");
    if (f != "json" && f != "csv") throw schema_error("format must be io::json or csv");
    c.format = f == "json" ? Format::json : Format::csv;
  }
  return c;
}

// Reads a configuration from a plain config object, a JSON output document
// (its "config" member) or a CSV output file (its "# config: " line).
[[nodiscard]] inline io::json read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw configuration_error("cannot open config '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  constexpr std::string_view marker = "# config: ";
  if (text.rfind('#', 0) == 0) {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line) && line.rfind('#', 0) == 0) {
      if (line.rfind(marker, 0) == 0) return io::json::parse(line.substr(marker.size()));
    }
    throw schema_error("'" + path + "' has no '# config: ' line");
  }
  io::json j;
  try {
    j = io::json::parse(text);
  } catch (const io::json::parse_error& e) {
    throw schema_error("'" + path + "' is not valid JSON: " + e.what());
  }
  if (j.is_object() && j.contains("config") && j.contains("tool")) return j.at("config");
  return j;
}

// ---- commands ------------------------------------------------------------

struct RunOutput {
  std::string text;
  std::vector<std::string> warnings;
};

namespace detail {

inline io::json document(const RunConfig& c) {
  io::json doc;
  doc["tool"] = "fairsel";
  doc["version"] = tool_version;
  doc["config"] = to_json(c);
  return doc;
}

inline std::string csv_preamble(const RunConfig& c) {
  return std::string("# fairsel ") + tool_version + "\n# config: " + to_json(c).dump() + "\n";
}

inline void model_warnings(const PopulationModel& pop, std::vector<std::string>& warnings) {
  const auto region = asymptotic::improvement_region(pop);
  if (!region.hypothesis_holds) {
    warnings.push_back(
        "improvement region: the model does not have one group with both larger sigma_hat and "
        "smaller sigma_tilde; alpha_min/alpha_max are reported but carry no guarantee");
  }
  if (pop.a().mu < 0.0 || pop.b().mu < 0.0) {
    warnings.push_back("fairness cost bound assumes mu_A, mu_B >= 0; the bound is not guaranteed");
  }
}

inline std::string render_records(const RunConfig& c, const std::vector<CurveRecord>& records,
                                  io::json extra) {
  if (c.format == Format::csv) {
    std::ostringstream out;
    out << csv_preamble(c);
    io::write_csv_header(out, io::curve_columns);
    for (const auto& r : records) io::write_csv_row(out, r);
    return out.str();
  }
  io::json doc = document(c);
  for (auto& [k, v] : extra.items()) doc[k] = v;
  io::json rows = io::json::array();
  for (const auto& r : records) rows.push_back(io::to_json(r));
  doc["records"] = std::move(rows);
  return doc.dump(2) + "\n";
}

inline io::json bound_json(const asymptotic::CostBound& b) {
  io::json j;
  j["lower"] = b.lower;
  j["upper"] = io::number(b.upper);
  j["regime"] = b.regime == asymptotic::BoundRegime::below_crossover ? "below_crossover"
                                                                     : "above_crossover";
  j["simplified_upper"] = b.simplified_upper ? io::number(*b.simplified_upper) : io::json(nullptr);
  j["hypothesis_holds"] = b.hypothesis_holds;
  j["swapped"] = b.swapped;
  j["clamped"] = b.clamped;
  return j;
}

inline io::json optional_number(const std::optional<double>& x) {
  return x ? io::number(*x) : io::json(nullptr);
}

}  // namespace detail

[[nodiscard]] inline RunOutput run_analyze(const RunConfig& c) {
  RunOutput out;
  const auto grid = budget_grid(c.alpha, false);
  const GammaLevel gamma(c.gamma);
  const auto& pop = c.model;
  detail::model_warnings(pop, out.warnings);

  auto records = asymptotic::sweep(pop, grid, c.algorithms, gamma);
  const auto c_obl = asymptotic::crossover_budget_oblivious(pop);
  const auto c_bay = asymptotic::crossover_budget_bayesian(pop);
  const auto region = asymptotic::improvement_region(pop);
  for (auto& r : records) {
    r.crossover_obl = c_obl.value_or(nan_value);
    r.crossover_bayes = c_bay.value_or(nan_value);
    r.alpha_min = region.alpha_min;
    r.alpha_max = region.alpha_max;
    r.source = "analytic";
    try {
      r.fairness_bound = asymptotic::fairness_cost_bound(pop, Budget(r.alpha), GammaLevel(1.0)).upper;
      r.fairness_bound_gamma = asymptotic::fairness_cost_bound(pop, Budget(r.alpha), gamma).upper;
    } catch (const error& e) {
      if (r.error.empty()) r.error = e.what();
    }
  }
  io::json extra;
  extra["crossover_obl"] = detail::optional_number(c_obl);
  extra["crossover_bayes"] = detail::optional_number(c_bay);
  extra["improvement_region"] = {{"alpha_min", io::number(region.alpha_min)},
                                 {"alpha_max", io::number(region.alpha_max)},
                                 {"hypothesis_holds", region.hypothesis_holds},
                                 {"swapped", region.swapped}};
  out.text = detail::render_records(c, records, extra);
  return out;
}

[[nodiscard]] inline RunOutput run_bounds(const RunConfig& c) {
  RunOutput out;
  const auto grid = budget_grid(c.alpha, false);
  const GammaLevel gamma(c.gamma);
  const auto& pop = c.model;
  detail::model_warnings(pop, out.warnings);

  const auto c_obl = asymptotic::crossover_budget_oblivious(pop);
  const auto c_bay = asymptotic::crossover_budget_bayesian(pop);
  const auto region = asymptotic::improvement_region(pop);
  const auto harm = asymptotic::harm_interval(pop, linear_grid(0.001, 0.999, 999));
  const double small_limit = asymptotic::small_budget_limit(pop);

  std::vector<std::pair<double, asymptotic::CostBound>> bounds;
  for (double a : grid) bounds.emplace_back(a, asymptotic::fairness_cost_bound(pop, Budget(a), gamma));
  for (const auto& [a, b] : bounds) {
    if (!b.hypothesis_holds) {
      out.warnings.push_back("alpha = " + io::format_number(a) +
                             ": fairness cost bound hypothesis does not hold");
      break;
    }
  }

  if (c.format == Format::csv) {
    std::ostringstream s;
    s << detail::csv_preamble(c);
    s << "# crossover_obl=" << (c_obl ? io::format_number(*c_obl) : "") << '\n';
    s << "# crossover_bayes=" << (c_bay ? io::format_number(*c_bay) : "") << '\n';
    s << "# alpha_min=" << io::format_number(region.alpha_min)
      << " alpha_max=" << io::format_number(region.alpha_max)
      << " hypothesis_holds=" << (region.hypothesis_holds ? "true" : "false") << '\n';
    s << "# harm_interval=" << (harm ? io::format_number(harm->first) + ":" + io::format_number(harm->second) : "")
      << '\n';
    s << "# small_budget_limit=" << io::format_number(small_limit) << '\n';
    s << "alpha,gamma,lower,upper,regime,simplified_upper,hypothesis_holds,clamped\n";
    for (const auto& [a, b] : bounds) {
      s << io::format_number(a) << ',' << io::format_number(c.gamma) << ','
        << io::format_number(b.lower) << ',' << io::format_number(b.upper) << ','
        << (b.regime == asymptotic::BoundRegime::below_crossover ? "below_crossover"
                                                                 : "above_crossover")
        << ',' << (b.simplified_upper ? io::format_number(*b.simplified_upper) : "") << ','
        << (b.hypothesis_holds ? "true" : "false") << ',' << (b.clamped ? "true" : "false")
        << '\n';
    }
    out.text = s.str();
    return out;
  }
  io::json doc = detail::document(c);
  doc["crossover_obl"] = detail::optional_number(c_obl);
  doc["crossover_bayes"] = detail::optional_number(c_bay);
  doc["improvement_region"] = {{"alpha_min", io::number(region.alpha_min)},
                               {"alpha_max", io::number(region.alpha_max)},
                               {"hypothesis_holds", region.hypothesis_holds},
                               {"swapped", region.swapped}};
  doc["harm_interval"] = harm ? io::json::array({harm->first, harm->second}) : io::json(nullptr);
  doc["small_budget_limit"] = io::number(small_limit);
  io::json rows = io::json::array();
  for (const auto& [a, b] : bounds) {
    io::json r = detail::bound_json(b);
    r["alpha"] = a;
    r["gamma"] = c.gamma;
    rows.push_back(std::move(r));
  }
  doc["bounds"] = std::move(rows);
  out.text = doc.dump(2) + "\n";
  return out;
}

[[nodiscard]] inline RunOutput run_simulate(const RunConfig& c) {
  RunOutput out;
  const auto ms = size_list(c.m, c.n);
  mc::CohortSpec spec = mc::CohortSpec::from_model(c.model);
  spec.prior[0] = parse_prior(c.prior_a, c.model.a());
  spec.prior[1] = parse_prior(c.prior_b, c.model.b());
  if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) throw configuration_error("gamma must lie in [0, 1]");
  mc::ReplicationOptions opt;
  opt.scoring = c.scoring;
  const auto report = mc::replicate(spec, c.n, ms, c.K, c.seed, c.algorithms, c.gamma, opt);
  if (c.K == 1) out.warnings.push_back("K = 1: standard deviations are reported as 0");

  if (c.format == Format::csv) {
    std::ostringstream s;
    s << detail::csv_preamble(c);
    io::write_csv_header(s, io::summary_columns);
    for (const auto& r : report.summaries) io::write_csv_row(s, r);
    for (const auto& r : report.ratios) io::write_csv_row(s, r);
    out.text = s.str();
    return out;
  }
  io::json doc = detail::document(c);
  io::json rows = io::json::array();
  for (const auto& r : report.summaries) rows.push_back(io::to_json(r));
  doc["summary"] = std::move(rows);
  io::json ratios = io::json::array();
  for (const auto& r : report.ratios) ratios.push_back(io::to_json(r));
  doc["ratios"] = std::move(ratios);
  out.text = doc.dump(2) + "\n";
  return out;
}

[[nodiscard]] inline RunOutput run_dataset(const RunConfig& c) {
  RunOutput out;
  if (c.csv.empty()) throw configuration_error("dataset needs --csv");
  const auto loaded = data::load_records(c.csv, c.schema, data::parse_group_map(c.group_map));
  if (loaded.dropped > 0) {
    out.warnings.push_back("dropped " + std::to_string(loaded.dropped) +
                           " row(s) with a missing or non-numeric quality value");
  }
  data::ExperimentConfig cfg;
  cfg.alpha_grid = budget_grid(c.alpha, true);
  cfg.algorithms = c.algorithms;
  cfg.gamma = c.gamma;
  cfg.k_values = c.k_values;
  cfg.sigma = c.sigma;
  cfg.scaled_group = c.scaled_group;
  cfg.beta = {c.model.a().beta, c.model.b().beta};
  cfg.seed = c.seed;
  auto result = data::run_dataset_experiment(loaded.records, cfg);
  for (auto& n : result.notes) out.warnings.push_back(std::move(n));

  io::json extra;
  const auto stats = data::group_stats(loaded.records);
  for (std::size_t g = 0; g < 2; ++g) {
    extra["group_stats"][g == 0 ? "A" : "B"] = {
        {"mean", stats[g].mean}, {"std", stats[g].std}, {"count", stats[g].count}};
  }
  extra["dropped_rows"] = loaded.dropped;
  out.text = detail::render_records(c, result.records, extra);
  return out;
}

[[nodiscard]] inline RunOutput run(const RunConfig& c) {
  switch (c.command) {
    case Command::analyze: return run_analyze(c);
    case Command::simulate: return run_simulate(c);
    case Command::dataset: return run_dataset(c);
    case Command::bounds: return run_bounds(c);
  }
  throw configuration_error("unknown command");
}

}  // namespace fairsel::cli

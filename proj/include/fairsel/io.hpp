#pragma once

// JSON and CSV writers for curve records, replication summaries and
// population models. CSV numbers carry 17 significant digits; JSON numbers
// use the shortest text that reads back to the same double. Non-finite values
// become null in JSON; in CSV NaN is an empty cell and infinities are inf/-inf.

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fairsel/dataset.hpp"
#include "fairsel/errors.hpp"
#include "fairsel/model.hpp"
#include "fairsel/montecarlo.hpp"
#include "fairsel/records.hpp"

namespace fairsel::io {

using json = nlohmann::ordered_json;

[[nodiscard]] inline std::string format_number(double x) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(len));
}

[[nodiscard]] inline json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

// ---- population model ----------------------------------------------------

[[nodiscard]] inline json model_to_json(const PopulationModel& pop) {
  return json{{"mu_a", pop.a().mu},       {"eta_a", pop.a().eta}, {"beta_a", pop.a().beta},
              {"sigma_a", pop.a().sigma}, {"mu_b", pop.b().mu},   {"eta_b", pop.b().eta},
              {"beta_b", pop.b().beta},   {"sigma_b", pop.b().sigma}, {"p_a", pop.p_a()}};
}

inline constexpr std::string_view model_keys[] = {"mu_a",   "eta_a",   "beta_a",
                                                  "sigma_a", "mu_b",   "eta_b",
                                                  "beta_b",  "sigma_b", "p_a"};

// Reads the flat model object. Every key is required unless `base` supplies it.
[[nodiscard]] inline PopulationModel model_from_json(const json& j,
                                                     const std::optional<PopulationModel>& base = {},
                                                     bool allow_degenerate = false) {
  if (!j.is_object()) throw schema_error("model must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto k : model_keys) known = known || key == k;
    if (!known) throw schema_error("unknown model key '" + key + "'");
    if (!value.is_number()) throw schema_error("model key '" + key + "' must be a number");
  }
  const json fallback = base ? model_to_json(*base) : json::object();
  auto get = [&](const char* key) -> double {
    if (j.contains(key)) return j.at(key).get<double>();
    if (fallback.contains(key)) return fallback.at(key).get<double>();
    throw schema_error(std::string("model is missing key '") + key + "'");
  };
  try {
    return PopulationModel({get("mu_a"), get("eta_a"), get("beta_a"), get("sigma_a")},
                           {get("mu_b"), get("eta_b"), get("beta_b"), get("sigma_b")}, get("p_a"),
                           allow_degenerate);
  } catch (const schema_error&) {
    throw;
  } catch (const error& e) {
    throw configuration_error(std::string("invalid model: ") + e.what());
  }
}

// ---- curve records -------------------------------------------------------

inline constexpr std::string_view curve_columns[] = {
    "alpha",         "algorithm",       "gamma",     "x_a",       "x_b",
    "theta_a",       "theta_b",         "utility",   "ratio_dp_obl", "ratio_opt_dp",
    "crossover_obl", "crossover_bayes", "alpha_min", "alpha_max", "fairness_bound",
    "fairness_bound_gamma", "k",        "source",    "error"};

[[nodiscard]] inline json to_json(const CurveRecord& r) {
  json j;
  j["alpha"] = number(r.alpha);
  j["algorithm"] = to_string(r.algorithm);
  j["gamma"] = number(r.gamma);
  j["x_a"] = number(r.x_a);
  j["x_b"] = number(r.x_b);
  j["theta_a"] = number(r.theta_a);
  j["theta_b"] = number(r.theta_b);
  j["utility"] = number(r.utility);
  j["ratio_dp_obl"] = number(r.ratio_dp_obl);
  j["ratio_opt_dp"] = number(r.ratio_opt_dp);
  j["crossover_obl"] = number(r.crossover_obl);
  j["crossover_bayes"] = number(r.crossover_bayes);
  j["alpha_min"] = number(r.alpha_min);
  j["alpha_max"] = number(r.alpha_max);
  j["fairness_bound"] = number(r.fairness_bound);
  j["fairness_bound_gamma"] = number(r.fairness_bound_gamma);
  j["k"] = r.k ? number(*r.k) : json(nullptr);
  j["source"] = r.source;
  j["error"] = r.error.empty() ? json(nullptr) : json(r.error);
  return j;
}

inline void write_csv_row(std::ostream& out, const CurveRecord& r) {
  out << format_number(r.alpha) << ',' << to_string(r.algorithm) << ','
      << format_number(r.gamma) << ',' << format_number(r.x_a) << ',' << format_number(r.x_b)
      << ',' << format_number(r.theta_a) << ',' << format_number(r.theta_b) << ','
      << format_number(r.utility) << ',' << format_number(r.ratio_dp_obl) << ','
      << format_number(r.ratio_opt_dp) << ',' << format_number(r.crossover_obl) << ','
      << format_number(r.crossover_bayes) << ',' << format_number(r.alpha_min) << ','
      << format_number(r.alpha_max) << ',' << format_number(r.fairness_bound) << ','
      << format_number(r.fairness_bound_gamma) << ','
      << (r.k ? format_number(*r.k) : std::string()) << ',' << data::csv_escape(r.source) << ','
      << data::csv_escape(r.error) << '\n';
}

template <class Columns>
void write_csv_header(std::ostream& out, const Columns& columns) {
  bool first = true;
  for (const auto& c : columns) {
    if (!first) out << ',';
    out << c;
    first = false;
  }
  out << '\n';
}

// ---- replication summaries -----------------------------------------------

inline constexpr std::string_view summary_columns[] = {
    "algorithm",  "gamma",    "n",        "m",          "K",
    "mean_utility", "std_utility", "ci_halfwidth", "mean_x_a", "mean_x_b",
    "std_degenerate", "asymptotic_utility", "asymptotic_x_a", "asymptotic_x_b"};

[[nodiscard]] inline json to_json(const mc::ReplicationSummary& s) {
  json j;
  j["algorithm"] = to_string(s.algorithm);
  j["gamma"] = number(s.gamma);
  j["n"] = s.n;
  j["m"] = s.m;
  j["K"] = s.K;
  j["mean_utility"] = number(s.mean_utility);
  j["std_utility"] = number(s.std_utility);
  j["ci_halfwidth"] = number(s.ci_halfwidth);
  j["mean_x_a"] = number(s.mean_x_a);
  j["mean_x_b"] = number(s.mean_x_b);
  j["std_degenerate"] = s.std_degenerate;
  j["asymptotic_utility"] = number(s.asymptotic_utility);
  j["asymptotic_x_a"] = number(s.asymptotic_x_a);
  j["asymptotic_x_b"] = number(s.asymptotic_x_b);
  return j;
}

// Ratio rows share the summary layout: the ratio's name sits in the
// algorithm column and its mean in mean_utility.
[[nodiscard]] inline json to_json(const mc::RatioSummary& s) {
  json j;
  j["algorithm"] = s.name;
  j["gamma"] = nullptr;
  j["n"] = s.n;
  j["m"] = s.m;
  j["K"] = s.K;
  j["mean_utility"] = number(s.mean);
  j["std_utility"] = number(s.std);
  j["ci_halfwidth"] = number(s.ci_halfwidth);
  j["mean_x_a"] = nullptr;
  j["mean_x_b"] = nullptr;
  j["std_degenerate"] = s.std_degenerate;
  j["asymptotic_utility"] = number(s.asymptotic);
  j["asymptotic_x_a"] = nullptr;
  j["asymptotic_x_b"] = nullptr;
  return j;
}

inline void write_csv_row(std::ostream& out, const mc::ReplicationSummary& s) {
  out << to_string(s.algorithm) << ',' << format_number(s.gamma) << ',' << s.n << ',' << s.m
      << ',' << s.K << ',' << format_number(s.mean_utility) << ',' << format_number(s.std_utility)
      << ',' << format_number(s.ci_halfwidth) << ',' << format_number(s.mean_x_a) << ','
      << format_number(s.mean_x_b) << ',' << (s.std_degenerate ? "true" : "false") << ','
      << format_number(s.asymptotic_utility) << ',' << format_number(s.asymptotic_x_a) << ','
      << format_number(s.asymptotic_x_b) << '\n';
}

inline void write_csv_row(std::ostream& out, const mc::RatioSummary& s) {
  out << s.name << ",," << s.n << ',' << s.m << ',' << s.K << ',' << format_number(s.mean) << ','
      << format_number(s.std) << ',' << format_number(s.ci_halfwidth) << ",,,"
      << (s.std_degenerate ? "true" : "false") << ',' << format_number(s.asymptotic) << ",,\n";
}

}  // namespace fairsel::io

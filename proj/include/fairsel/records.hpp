#pragma once

// Algorithm tags and the row type shared by the analytic sweep, the dataset
// experiment and the serializers.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairsel/errors.hpp"

namespace fairsel {

enum class Algorithm {
  oblivious,
  bayesian,
  gamma_oblivious,
  gamma_bayesian,
  demographic_parity,
};

inline constexpr Algorithm all_algorithms[] = {
    Algorithm::oblivious, Algorithm::bayesian, Algorithm::gamma_oblivious,
    Algorithm::gamma_bayesian, Algorithm::demographic_parity};

[[nodiscard]] inline const char* to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::oblivious: return "oblivious";
    case Algorithm::bayesian: return "bayesian";
    case Algorithm::gamma_oblivious: return "gamma_oblivious";
    case Algorithm::gamma_bayesian: return "gamma_bayesian";
    case Algorithm::demographic_parity: return "demographic_parity";
  }
  return "?";
}

[[nodiscard]] inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
  if (s == "oblivious" || s == "obl") return Algorithm::oblivious;
  if (s == "bayesian" || s == "opt" || s == "bayes") return Algorithm::bayesian;
  if (s == "gamma_oblivious" || s == "fair_obl") return Algorithm::gamma_oblivious;
  if (s == "gamma_bayesian" || s == "fair_opt") return Algorithm::gamma_bayesian;
  if (s == "demographic_parity" || s == "dp") return Algorithm::demographic_parity;
  return std::nullopt;
}

// gamma actually enforced by an algorithm run at the requested level.
[[nodiscard]] inline double effective_gamma(Algorithm a, double gamma) noexcept {
  switch (a) {
    case Algorithm::gamma_oblivious:
    case Algorithm::gamma_bayesian: return gamma;
    case Algorithm::demographic_parity: return 1.0;
    default: return 0.0;
  }
}

inline constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

struct CurveRecord {
  double alpha = nan_value;
  Algorithm algorithm = Algorithm::oblivious;
  double gamma = 0.0;
  double x_a = nan_value;
  double x_b = nan_value;
  double theta_a = nan_value;
  double theta_b = nan_value;
  double utility = nan_value;
  // Same value on every row of one alpha.
  double ratio_dp_obl = nan_value;
  double ratio_opt_dp = nan_value;
  // Overlay columns; NaN when not computed.
  double crossover_obl = nan_value;
  double crossover_bayes = nan_value;
  double alpha_min = nan_value;
  double alpha_max = nan_value;
  // Upper bound on Q^opt / Q^dp (gamma = 1), and on Q^opt / Q^gamma-fair-opt at
  // the run's gamma.
  double fairness_bound = nan_value;
  double fairness_bound_gamma = nan_value;
  // Dataset runs only.
  std::optional<double> k;
  std::string source;
  // Non-empty when this point failed; numeric fields are then NaN.
  std::string error;
};

// steps points from lo to hi inclusive.
[[nodiscard]] inline std::vector<double> linear_grid(double lo, double hi, std::size_t steps) {
  if (steps == 0) throw configuration_error("grid needs at least one point");
  if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
    throw configuration_error("grid bounds must be finite with lo <= hi");
  }
  if (steps == 1) return {lo};
  std::vector<double> grid(steps);
  const double n = static_cast<double>(steps - 1);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i);
    grid[i] = (lo * (n - t) + hi * t) / n;
  }
  return grid;
}

}  // namespace fairsel

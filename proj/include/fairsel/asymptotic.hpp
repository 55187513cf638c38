#pragma once

// Large-population analysis of threshold selection rules.
//
// As n grows every selection rule here is equivalent to a pair of per-group
// thresholds on W_hat, so an algorithm is described by the fraction x_A of
// A-candidates it selects; the budget then fixes x_B = (alpha - p_A x_A) / p_B.
// The expected quality of the selected candidates is
//
//   Q(x_A) = (1/alpha) * sum_G p_G * [x_G mu_G + sigma_tilde_G * phi(Phi^-1(1 - x_G))],
//
// the mean of a normal posterior truncated at its (1 - x_G) quantile. Q is
// strictly concave in x_A and peaks at the Bayesian-optimal rate.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairsel/errors.hpp"
#include "fairsel/model.hpp"
#include "fairsel/numeric.hpp"
#include "fairsel/records.hpp"
#include "fairsel/stdnorm.hpp"

namespace fairsel::asymptotic {

enum class ThresholdSpace {
  estimate,   // threshold on W_hat; group G has mean mu - beta, sd sigma_hat
  posterior,  // threshold on E[W | W_hat]; group G has mean mu, sd sigma_tilde
};

struct SelectionOutcome {
  double x_a = 0.0;
  double x_b = 0.0;
  // Thresholds on W_hat; +inf when nobody in the group is selected.
  double theta_a = 0.0;
  double theta_b = 0.0;
  double utility = 0.0;
};

namespace detail {

inline constexpr double rate_slack = 1e-12;

struct Location {
  double mean;
  double scale;
};

inline Location location(const PopulationModel& pop, Group g, ThresholdSpace space) {
  const auto& p = pop.group(g);
  const auto& s = pop.stats(g);
  if (space == ThresholdSpace::estimate) return {p.mu - p.beta, s.sigma_hat};
  return {p.mu, s.sigma_tilde};
}

// Mass of group g above threshold t.
inline double mass_above(const Location& loc, double t) {
  return stdnorm::cdf((loc.mean - t) / loc.scale);
}

inline double estimate_threshold(const PopulationModel& pop, Group g, double rate) {
  const auto& p = pop.group(g);
  return p.mu - p.beta + pop.stats(g).sigma_hat * stdnorm::upper_quantile(rate);
}

inline double other_rate(double x_a, double alpha, double p_a) {
  return (alpha - p_a * x_a) / (1.0 - p_a);
}

inline double clamp_rate(double x, const char* what) {
  if (std::isnan(x) || x < -rate_slack || x > 1.0 + rate_slack) {
    throw domain_error(std::string(what) + " must lie in [0, 1], got " + std::to_string(x));
  }
  return std::clamp(x, 0.0, 1.0);
}

inline double utility_of_rates(const PopulationModel& pop, double x_a, double x_b, double alpha) {
  double total = 0.0;
  for (Group g : {Group::A, Group::B}) {
    const double x = g == Group::A ? x_a : x_b;
    const auto& p = pop.group(g);
    total += pop.share(g) *
             (x * p.mu + pop.stats(g).sigma_tilde * stdnorm::density_at_quantile(x));
  }
  return total / alpha;
}

// Swap flag plus the population relabelled so that `want_a_first` holds.
inline std::pair<PopulationModel, bool> canonical(const PopulationModel& pop, bool swap) {
  return swap ? std::pair{pop.swapped(), true} : std::pair{pop, false};
}

}  // namespace detail

// Common threshold theta with sum_G p_G * P(score_G >= theta) = alpha.
[[nodiscard]] inline double solve_common_threshold(const PopulationModel& pop, Budget alpha,
                                                   ThresholdSpace space,
                                                   const numeric::RootTolerance& tol = {}) {
  const detail::Location la = detail::location(pop, Group::A, space);
  const detail::Location lb = detail::location(pop, Group::B, space);
  for (const auto* l : {&la, &lb}) {
    if (!(l->scale > 0.0)) {
      throw degenerate_model_error(
          "a group has zero score variance; no common threshold separates its candidates");
    }
  }
  const double pa = pop.p_a();
  auto mass = [&](double t) {
    return pa * detail::mass_above(la, t) + (1.0 - pa) * detail::mass_above(lb, t);
  };
  double lo = std::min(la.mean - 10.0 * la.scale, lb.mean - 10.0 * lb.scale);
  double hi = std::max(la.mean + 10.0 * la.scale, lb.mean + 10.0 * lb.scale);
  double width = hi - lo;
  int expansions = 0;
  while (mass(lo) < alpha || mass(hi) > alpha) {
    if (++expansions > 200 || !std::isfinite(width)) {
      throw numeric_error("solve_common_threshold: failed to bracket the threshold");
    }
    if (mass(lo) < alpha) lo -= width;
    if (mass(hi) > alpha) hi += width;
    width *= 2.0;
  }
  return numeric::bisect_decreasing(mass, alpha.value(), lo, hi, tol);
}

// Group-blind top-alpha selection on W_hat.
[[nodiscard]] inline SelectionOutcome selection_rates_oblivious(const PopulationModel& pop,
                                                                Budget alpha) {
  const double theta = solve_common_threshold(pop, alpha, ThresholdSpace::estimate);
  SelectionOutcome out;
  out.x_a = detail::mass_above(detail::location(pop, Group::A, ThresholdSpace::estimate), theta);
  // The budget identity fixes x_b exactly; the root's last-ulp error stays in x_a.
  out.x_b = detail::clamp_rate(detail::other_rate(out.x_a, alpha, pop.p_a()), "implied x_b");
  out.theta_a = out.theta_b = theta;
  out.utility = detail::utility_of_rates(pop, out.x_a, out.x_b, alpha);
  return out;
}

// Top-alpha selection on the posterior mean. Thresholds are reported on W_hat.
[[nodiscard]] inline SelectionOutcome selection_rates_bayesian(const PopulationModel& pop,
                                                               Budget alpha) {
  const double theta = solve_common_threshold(pop, alpha, ThresholdSpace::posterior);
  SelectionOutcome out;
  out.x_a = detail::mass_above(detail::location(pop, Group::A, ThresholdSpace::posterior), theta);
  // The budget identity fixes x_b exactly; the root's last-ulp error stays in x_a.
  out.x_b = detail::clamp_rate(detail::other_rate(out.x_a, alpha, pop.p_a()), "implied x_b");
  out.theta_a = estimate_for_posterior(theta, pop.a());
  out.theta_b = estimate_for_posterior(theta, pop.b());
  out.utility = detail::utility_of_rates(pop, out.x_a, out.x_b, alpha);
  return out;
}

// Feasible x_A interval under the gamma rule: rates must satisfy
// x_A >= gamma x_B and x_B >= gamma x_A, and both must lie in [0, 1].
struct GammaInterval {
  double lower;
  double upper;
};

[[nodiscard]] inline GammaInterval gamma_interval(Budget alpha, double p_a, GammaLevel gamma) {
  if (!(p_a > 0.0 && p_a < 1.0)) throw domain_error("p_a must lie in (0, 1)");
  const double a = alpha;
  const double g = gamma;
  const double p_b = 1.0 - p_a;
  const double fair_lo = a * g / (g * p_a + p_b);
  const double fair_hi = a / (p_a + g * p_b);
  const double feas_lo = std::max(0.0, (a - p_b) / p_a);
  const double feas_hi = std::min(1.0, a / p_a);
  const double lo = std::max(fair_lo, feas_lo);
  const double hi = std::min(fair_hi, feas_hi);
  if (lo > hi + detail::rate_slack) {
    std::string which = fair_lo > feas_hi ? "x_A >= gamma * x_B exceeds the largest feasible x_A"
                                          : "x_B >= gamma * x_A forces x_A below the smallest "
                                            "feasible x_A";
    throw constraint_error("gamma rule infeasible: " + which);
  }
  return {lo, std::max(lo, hi)};
}

// Projects a baseline x_A onto the gamma-feasible interval.
[[nodiscard]] inline std::pair<double, double> apply_gamma_rule(double x_a_baseline, Budget alpha,
                                                                double p_a, GammaLevel gamma) {
  const GammaInterval iv = gamma_interval(alpha, p_a, gamma);
  const double x_a = gamma.value() == 1.0 ? alpha.value() : std::clamp(x_a_baseline, iv.lower, iv.upper);
  const double x_b = std::clamp(detail::other_rate(x_a, alpha, p_a), 0.0, 1.0);
  return {x_a, x_b};
}

// Q(x_A).
[[nodiscard]] inline double utility(const PopulationModel& pop, double x_a, Budget alpha) {
  const double xa = detail::clamp_rate(x_a, "x_a");
  const double xb = detail::clamp_rate(detail::other_rate(xa, alpha, pop.p_a()), "implied x_b");
  return detail::utility_of_rates(pop, xa, xb, alpha);
}

// Q'(x_A) = (p_A / alpha) * [E[W | W_hat = theta_A; A] - E[W | W_hat = theta_B; B]]
// where theta_G is the W_hat threshold that selects a fraction x_G of group G.
[[nodiscard]] inline double utility_derivative(const PopulationModel& pop, double x_a,
                                               Budget alpha) {
  const double xb = detail::other_rate(x_a, alpha, pop.p_a());
  if (!(x_a > 0.0 && x_a < 1.0) || !(xb > 0.0 && xb < 1.0)) {
    throw domain_error("utility_derivative: rates must be strictly inside (0, 1); thresholds "
                       "are infinite on the boundary");
  }
  const double theta_a = detail::estimate_threshold(pop, Group::A, x_a);
  const double theta_b = detail::estimate_threshold(pop, Group::B, xb);
  return pop.p_a() / alpha *
         (posterior_mean(theta_a, pop.a()) - posterior_mean(theta_b, pop.b()));
}

// Outcome of a rule that selects A-candidates at rate x_a.
[[nodiscard]] inline SelectionOutcome outcome_at_rate(const PopulationModel& pop, double x_a,
                                                      Budget alpha) {
  SelectionOutcome out;
  out.x_a = detail::clamp_rate(x_a, "x_a");
  out.x_b = detail::clamp_rate(detail::other_rate(out.x_a, alpha, pop.p_a()), "implied x_b");
  out.theta_a = detail::estimate_threshold(pop, Group::A, out.x_a);
  out.theta_b = detail::estimate_threshold(pop, Group::B, out.x_b);
  out.utility = detail::utility_of_rates(pop, out.x_a, out.x_b, alpha);
  return out;
}

// Budget below which the oblivious rule favours the high-variance group.
// nullopt when sigma_hat is equal across groups.
[[nodiscard]] inline std::optional<double> crossover_budget_oblivious(const PopulationModel& pop) {
  const double d_sigma = pop.stats(Group::A).sigma_hat - pop.stats(Group::B).sigma_hat;
  if (d_sigma == 0.0) return std::nullopt;
  const double d_mu = pop.a().mu - pop.b().mu;
  const double d_beta = pop.a().beta - pop.b().beta;
  return stdnorm::cdf((d_mu - d_beta) / d_sigma);
}

// Budget below which the Bayesian rule favours the group with larger sigma_tilde.
[[nodiscard]] inline std::optional<double> crossover_budget_bayesian(const PopulationModel& pop) {
  const double d_sigma = pop.stats(Group::A).sigma_tilde - pop.stats(Group::B).sigma_tilde;
  if (d_sigma == 0.0) return std::nullopt;
  return stdnorm::cdf((pop.a().mu - pop.b().mu) / d_sigma);
}

struct ImprovementRegion {
  // Outside [alpha_min, alpha_max] demographic parity strictly beats the
  // oblivious rule. NaN when a crossover budget does not exist.
  double alpha_min = nan_value;
  double alpha_max = nan_value;
  // sigma_hat_A > sigma_hat_B and sigma_tilde_A < sigma_tilde_B after relabelling.
  bool hypothesis_holds = false;
  // Groups were exchanged to put the high-variance group first.
  bool swapped = false;
};

[[nodiscard]] inline ImprovementRegion improvement_region(const PopulationModel& pop) {
  ImprovementRegion r;
  const bool swap = pop.stats(Group::A).sigma_hat < pop.stats(Group::B).sigma_hat;
  const auto [canon, swapped] = detail::canonical(pop, swap);
  r.swapped = swapped;
  const auto& sa = canon.stats(Group::A);
  const auto& sb = canon.stats(Group::B);
  r.hypothesis_holds = sa.sigma_hat > sb.sigma_hat && sa.sigma_tilde < sb.sigma_tilde;
  const auto c_obl = crossover_budget_oblivious(canon);
  const auto c_opt = crossover_budget_bayesian(canon);
  if (c_obl && c_opt) {
    r.alpha_min = std::min(*c_obl, *c_opt);
    r.alpha_max = std::max(*c_obl, *c_opt);
  }
  return r;
}

enum class BoundRegime { below_crossover, above_crossover };

struct CostBound {
  double lower = 1.0;
  double upper = 1.0;
  BoundRegime regime = BoundRegime::below_crossover;
  // Simplified bound for group-independent quality with unbiased estimates
  // and alpha <= 1/2.
  std::optional<double> simplified_upper;
  bool hypothesis_holds = false;
  bool swapped = false;
  // The raw expression fell below 1 and was raised to 1.
  bool clamped = false;
};

namespace detail {

inline bool group_independent_unbiased(const PopulationModel& pop) {
  return pop.a().mu == pop.b().mu && pop.a().eta == pop.b().eta && pop.a().beta == 0.0 &&
         pop.b().beta == 0.0;
}

// Bayesian crossover with the sigma_tilde tie resolved by the sign of d_mu.
inline double bayes_crossover_total(const PopulationModel& pop) {
  if (auto c = crossover_budget_bayesian(pop)) return *c;
  const double d_mu = pop.a().mu - pop.b().mu;
  return d_mu > 0.0 ? 1.0 : (d_mu < 0.0 ? 0.0 : 0.5);
}

}  // namespace detail

// Upper bound on Q(x_opt) / Q(x_gamma-fair-opt).
[[nodiscard]] inline CostBound fairness_cost_bound(const PopulationModel& pop, Budget alpha,
                                                   GammaLevel gamma) {
  CostBound out;
  const bool swap = pop.stats(Group::A).sigma_tilde > pop.stats(Group::B).sigma_tilde;
  const auto [canon, swapped] = detail::canonical(pop, swap);
  out.swapped = swapped;
  const auto& a = canon.a();
  const auto& b = canon.b();
  const auto& sa = canon.stats(Group::A);
  const auto& sb = canon.stats(Group::B);
  const double p_a = canon.p_a();
  const double p_b = canon.p_b();
  out.hypothesis_holds = sa.sigma_tilde < sb.sigma_tilde && a.mu >= 0.0 && b.mu >= 0.0;

  const double crossover = detail::bayes_crossover_total(canon);
  out.regime = alpha <= crossover ? BoundRegime::below_crossover : BoundRegime::above_crossover;
  if (gamma.value() == 0.0) {
    out.upper = 1.0;
    if (detail::group_independent_unbiased(canon) && alpha <= 0.5) out.simplified_upper = 1.0;
    return out;
  }

  const double z = stdnorm::upper_quantile(alpha);
  const double phi = stdnorm::pdf(z);
  const double q_dp = p_a * a.mu + p_b * b.mu + phi / alpha * (p_a * sa.sigma_tilde + p_b * sb.sigma_tilde);
  if (!(q_dp > 0.0)) {
    out.hypothesis_holds = false;
    out.upper = std::numeric_limits<double>::infinity();
    return out;
  }
  const double g = p_a / alpha * ((a.mu - b.mu) + z * (sa.sigma_tilde - sb.sigma_tilde)) / q_dp;
  double upper = 0.0;
  if (out.regime == BoundRegime::below_crossover) {
    upper = 1.0 - alpha / (p_a + p_b / gamma) * g;
  } else {
    upper = 1.0 + (1.0 - alpha / (p_a + p_b * gamma)) * g;
  }
  if (upper < 1.0) {
    out.clamped = true;
    upper = 1.0;
  }
  out.upper = upper;

  if (detail::group_independent_unbiased(canon) && alpha <= 0.5) {
    const double nu = sa.sigma_hat / sb.sigma_hat;
    const double g_alpha = alpha * z / phi;
    out.simplified_upper =
        1.0 + g_alpha / (p_a + p_b / gamma) * (p_a * (nu - 1.0) / (p_a + p_b * nu));
  }
  return out;
}

// gamma = 1 bound for group-independent, unbiased models that holds for every
// alpha <= 1/2: 1 + p_A (nu - 1) / (p_A + p_B nu), nu = sigma_hat_A / sigma_hat_B
// with A the high-variance group. Tends to 1 / (1 - p_A) as nu grows.
[[nodiscard]] inline double parity_cost_ceiling(const PopulationModel& pop) {
  const bool swap = pop.stats(Group::A).sigma_hat < pop.stats(Group::B).sigma_hat;
  const auto [canon, swapped] = detail::canonical(pop, swap);
  const double nu = canon.stats(Group::A).sigma_hat / canon.stats(Group::B).sigma_hat;
  const double p_a = canon.p_a();
  return 1.0 + p_a * (nu - 1.0) / (p_a + (1.0 - p_a) * nu);
}

// alpha -> 0 limit of the gamma = 1 bound: 1 - p_A d_sigma_tilde / sum_G p_G sigma_tilde_G,
// with A the group of smaller sigma_tilde.
[[nodiscard]] inline double small_budget_limit(const PopulationModel& pop) {
  const bool swap = pop.stats(Group::A).sigma_tilde > pop.stats(Group::B).sigma_tilde;
  const auto [canon, swapped] = detail::canonical(pop, swap);
  const double ta = canon.stats(Group::A).sigma_tilde;
  const double tb = canon.stats(Group::B).sigma_tilde;
  const double p_a = canon.p_a();
  const double total = p_a * ta + (1.0 - p_a) * tb;
  return 1.0 - p_a * (ta - tb) / total;
}

// Maximiser of Q: the Bayesian-optimal rate.
[[nodiscard]] inline double optimal_rate(const PopulationModel& pop, Budget alpha) {
  return selection_rates_bayesian(pop, alpha).x_a;
}

// Outcome of one algorithm at one budget.
[[nodiscard]] inline SelectionOutcome outcome(const PopulationModel& pop, Budget alpha,
                                              Algorithm algorithm, GammaLevel gamma) {
  switch (algorithm) {
    case Algorithm::oblivious: return selection_rates_oblivious(pop, alpha);
    case Algorithm::bayesian: return selection_rates_bayesian(pop, alpha);
    case Algorithm::demographic_parity: return outcome_at_rate(pop, alpha, alpha);
    case Algorithm::gamma_oblivious:
    case Algorithm::gamma_bayesian: {
      const auto base = algorithm == Algorithm::gamma_oblivious
                            ? selection_rates_oblivious(pop, alpha)
                            : selection_rates_bayesian(pop, alpha);
      const auto [x_a, x_b] = apply_gamma_rule(base.x_a, alpha, pop.p_a(), gamma);
      (void)x_b;
      return outcome_at_rate(pop, x_a, alpha);
    }
  }
  throw domain_error("unknown algorithm");
}

// Budgets in `grid` where demographic parity is strictly worse than the
// oblivious rule, as [first, last] of the contiguous run inside
// (alpha_min, alpha_max). Empty when no grid point is harmed.
[[nodiscard]] inline std::optional<std::pair<double, double>> harm_interval(
    const PopulationModel& pop, std::span<const double> grid) {
  std::optional<std::pair<double, double>> out;
  for (double a : grid) {
    const Budget alpha(a);
    const double q_dp = outcome_at_rate(pop, a, alpha).utility;
    const double q_obl = selection_rates_oblivious(pop, alpha).utility;
    if (q_dp < q_obl) {
      if (!out) out = std::pair{a, a};
      out->second = a;
    }
  }
  return out;
}

// One record per (alpha, algorithm), alpha-major. Failures at a point are
// recorded in the row's error field; the sweep itself never throws for a
// bad grid value.
[[nodiscard]] inline std::vector<CurveRecord> sweep(const PopulationModel& pop,
                                                    std::span<const double> alpha_grid,
                                                    std::span<const Algorithm> algorithms,
                                                    GammaLevel gamma) {
  std::vector<CurveRecord> records;
  records.reserve(alpha_grid.size() * algorithms.size());
  for (double a : alpha_grid) {
    double ratio_dp_obl = nan_value;
    double ratio_opt_dp = nan_value;
    std::string point_error;
    try {
      const Budget alpha(a);
      const double q_obl = selection_rates_oblivious(pop, alpha).utility;
      const double q_opt = selection_rates_bayesian(pop, alpha).utility;
      const double q_dp = outcome_at_rate(pop, a, alpha).utility;
      ratio_dp_obl = q_dp / q_obl;
      ratio_opt_dp = q_opt / q_dp;
    } catch (const std::exception& e) {
      point_error = e.what();
    }
    for (Algorithm alg : algorithms) {
      CurveRecord rec;
      rec.alpha = a;
      rec.algorithm = alg;
      rec.gamma = effective_gamma(alg, gamma);
      rec.ratio_dp_obl = ratio_dp_obl;
      rec.ratio_opt_dp = ratio_opt_dp;
      try {
        const auto o = outcome(pop, Budget(a), alg, gamma);
        rec.x_a = o.x_a;
        rec.x_b = o.x_b;
        rec.theta_a = o.theta_a;
        rec.theta_b = o.theta_b;
        rec.utility = o.utility;
        if (!point_error.empty()) rec.error = point_error;
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
      records.push_back(std::move(rec));
    }
  }
  return records;
}

}  // namespace fairsel::asymptotic

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "fairsel/asymptotic.hpp"
#include "support/oracles.hpp"

using namespace fairsel;
using namespace fairsel::asymptotic;
using Catch::Approx;

namespace {

PopulationModel fig_model() { return symmetric_model(1.0, 1.0, 3.0, 0.2, 0.4); }

PopulationModel biased_model() {
  return PopulationModel({1.0, 1.0, 1.0, 3.0}, {1.0, 1.0, 0.0, 0.2}, 0.4);
}

PopulationModel identical_model() { return symmetric_model(0.0, 1.0, 0.0, 0.0, 0.4); }

void check_budget(const SelectionOutcome& o, const PopulationModel& pop, double alpha) {
  CHECK(std::abs(pop.p_a() * o.x_a + pop.p_b() * o.x_b - alpha) <= 1e-9);
  CHECK(o.x_a >= 0.0);
  CHECK(o.x_a <= 1.0);
  CHECK(o.x_b >= 0.0);
  CHECK(o.x_b <= 1.0);
}

}  // namespace

TEST_CASE("common threshold for identical groups") {
  const auto pop = symmetric_model(0.0, 1.0, 0.0, 0.0, 0.4);
  CHECK(std::abs(solve_common_threshold(pop, Budget(0.5), ThresholdSpace::estimate)) <= 1e-10);
  CHECK(solve_common_threshold(pop, Budget(0.2), ThresholdSpace::estimate) ==
        Approx(oracle::norm_quantile(0.8)).margin(1e-9));
}

TEST_CASE("common threshold meets the budget residual") {
  const auto pop = fig_model();
  const double theta = solve_common_threshold(pop, Budget(0.3), ThresholdSpace::estimate);
  auto mass = [](double t) {
    return 0.4 * (1.0 - oracle::norm_cdf((t - 1.0) / std::sqrt(10.0))) +
           0.6 * (1.0 - oracle::norm_cdf((t - 1.0) / std::sqrt(1.04)));
  };
  CHECK(std::abs(mass(theta) - 0.3) <= 1e-10);
  const double reference = oracle::bisect(mass, 0.3, -20.0, 20.0);
  CHECK(theta == Approx(reference).margin(1e-9));
}

TEST_CASE("common threshold rejects zero score variance") {
  const PopulationModel pop({1.0, 0.0, 0.0, 1.0}, {1.0, 1.0, 0.0, 1.0}, 0.5, true);
  CHECK_NOTHROW(solve_common_threshold(pop, Budget(0.3), ThresholdSpace::estimate));
  CHECK_THROWS_AS(solve_common_threshold(pop, Budget(0.3), ThresholdSpace::posterior),
                  degenerate_model_error);
  CHECK_THROWS_AS(selection_rates_bayesian(pop, Budget(0.3)), degenerate_model_error);
}

TEST_CASE("identical groups are selected at the budget rate") {
  const auto pop = identical_model();
  for (double a : {0.05, 0.3, 0.5, 0.9}) {
    const auto o = selection_rates_oblivious(pop, Budget(a));
    const auto b = selection_rates_bayesian(pop, Budget(a));
    CHECK(o.x_a == Approx(a).margin(1e-9));
    CHECK(o.x_b == Approx(a).margin(1e-9));
    CHECK(b.x_a == Approx(a).margin(1e-9));
    CHECK(optimal_rate(pop, Budget(a)) == Approx(a).margin(1e-9));
  }
}

TEST_CASE("oblivious over-selects the noisy group below one half, Bayesian the reverse") {
  const auto pop = fig_model();
  const auto o3 = selection_rates_oblivious(pop, Budget(0.3));
  const auto o7 = selection_rates_oblivious(pop, Budget(0.7));
  CHECK(o3.x_a > o3.x_b);
  CHECK(o7.x_a < o7.x_b);
  const auto b3 = selection_rates_bayesian(pop, Budget(0.3));
  const auto b7 = selection_rates_bayesian(pop, Budget(0.7));
  CHECK(b3.x_a < b3.x_b);
  CHECK(b7.x_a > b7.x_b);
  CHECK(optimal_rate(pop, Budget(0.3)) < 0.3);
  for (const auto* o : {&o3, &o7}) check_budget(*o, pop, o == &o3 ? 0.3 : 0.7);
  check_budget(b3, pop, 0.3);
  check_budget(b7, pop, 0.7);
}

TEST_CASE("Bayesian thresholds are reported on the estimate scale") {
  const auto pop = biased_model();
  const Budget alpha(0.2);
  const auto b = selection_rates_bayesian(pop, alpha);
  const double theta_post = solve_common_threshold(pop, alpha, ThresholdSpace::posterior);
  CHECK(posterior_mean(b.theta_a, pop.a()) == Approx(theta_post).epsilon(1e-12));
  CHECK(posterior_mean(b.theta_b, pop.b()) == Approx(theta_post).epsilon(1e-12));
  const double s_a = pop.stats(Group::A).sigma_hat;
  CHECK(b.x_a == Approx(1.0 - oracle::norm_cdf((b.theta_a - 1.0 + 1.0) / s_a)).margin(1e-10));
}

TEST_CASE("gamma rule projection") {
  auto [xa1, xb1] = apply_gamma_rule(0.9, Budget(0.5), 0.4, GammaLevel(1.0));
  CHECK(xa1 == 0.5);
  CHECK(xb1 == Approx(0.5).margin(1e-15));
  auto [xa0, xb0] = apply_gamma_rule(0.7, Budget(0.5), 0.4, GammaLevel(0.0));
  CHECK(xa0 == 0.7);
  CHECK(xb0 == Approx((0.5 - 0.28) / 0.6).epsilon(1e-15));
  const auto iv = gamma_interval(Budget(0.5), 0.4, GammaLevel(0.8));
  CHECK(iv.lower == Approx(0.4 / 0.92).epsilon(1e-14));
  CHECK(iv.upper == Approx(0.5 / 0.88).epsilon(1e-14));
  auto [xa, xb] = apply_gamma_rule(0.9, Budget(0.5), 0.4, GammaLevel(0.8));
  CHECK(xa == Approx(0.56818).margin(1e-5));
  CHECK(xa >= 0.8 * xb - 1e-12);
  CHECK(xb >= 0.8 * xa - 1e-12);
}

TEST_CASE("gamma rule respects both ratio constraints across budgets") {
  for (double p_a : {0.05, 0.4, 0.95}) {
    for (double g : {0.2, 0.8, 1.0}) {
      for (double a : {0.01, 0.3, 0.6, 0.99}) {
        for (double base : {0.0, 0.5, 1.0}) {
          auto [xa, xb] = apply_gamma_rule(base, Budget(a), p_a, GammaLevel(g));
          CHECK(xa >= g * xb - 1e-12);
          CHECK(xb >= g * xa - 1e-12);
          CHECK(p_a * xa + (1 - p_a) * xb == Approx(a).margin(1e-12));
        }
      }
    }
  }
}

TEST_CASE("utility closed form on the standard example") {
  const auto pop = fig_model();
  const double expected =
      1.0 + oracle::norm_pdf(0.0) / 0.5 * (0.4 / std::sqrt(10.0) + 0.6 / std::sqrt(1.04));
  CHECK(utility(pop, 0.5, Budget(0.5)) == Approx(expected).epsilon(1e-14));
  CHECK(utility(pop, 0.5, Budget(0.5)) == Approx(1.57036).margin(5e-6));
  CHECK_THROWS_AS(utility(pop, 0.95, Budget(0.3)), domain_error);
}

TEST_CASE("utility closed form agrees with a Monte Carlo estimate") {
  const auto pop = fig_model();
  const double alpha = 0.5;
  const double x_a = 0.5;
  const double q = utility(pop, x_a, Budget(alpha));
  std::mt19937_64 gen(20240501);
  std::normal_distribution<double> normal;
  const int n = 1000000;
  const double theta_a = 1.0 + std::sqrt(10.0) * oracle::norm_quantile(1.0 - x_a);
  const double theta_b = 1.0 + std::sqrt(1.04) * oracle::norm_quantile(1.0 - x_a);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const bool in_a = i < 0.4 * n;
    const double w = 1.0 + normal(gen);
    const double w_hat = w + (in_a ? 3.0 : 0.2) * normal(gen);
    const double v = w_hat >= (in_a ? theta_a : theta_b) ? w / alpha : 0.0;
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  CHECK(std::abs(mean - q) <= 3.0 * se);
}

TEST_CASE("utility at parity equals the total-expectation expression") {
  for (const auto& pop : {fig_model(), biased_model()}) {
    for (double a : {0.02, 0.25, 0.5, 0.8}) {
      const double z = oracle::norm_quantile(1.0 - a);
      const double closed = pop.p_a() * pop.a().mu + pop.p_b() * pop.b().mu +
                            oracle::norm_pdf(z) / a *
                                (pop.p_a() * pop.stats(Group::A).sigma_tilde +
                                 pop.p_b() * pop.stats(Group::B).sigma_tilde);
      CHECK(utility(pop, a, Budget(a)) == Approx(closed).epsilon(1e-12));
    }
  }
}

TEST_CASE("utility tends to the population mean as everyone is selected") {
  const auto pop = PopulationModel({0.5, 1.0, 0.0, 1.0}, {2.0, 1.0, 0.0, 1.0}, 0.4);
  const double a = 1.0 - 1e-12;
  CHECK(utility(pop, a, Budget(a)) == Approx(0.4 * 0.5 + 0.6 * 2.0).margin(1e-9));
}

TEST_CASE("utility derivative vanishes at the optimum and matches finite differences") {
  const auto pop = biased_model();
  const Budget alpha(0.3);
  CHECK(std::abs(utility_derivative(pop, optimal_rate(pop, alpha), alpha)) <= 1e-8);
  CHECK(utility_derivative(identical_model(), 0.3, alpha) == Approx(0.0).margin(1e-12));
  const double h = 1e-5;
  for (double x = 0.05; x < 0.7; x += 0.05) {
    const double fd = (utility(pop, x + h, alpha) - utility(pop, x - h, alpha)) / (2 * h);
    const double d = utility_derivative(pop, x, alpha);
    CHECK(std::abs(fd - d) <= 1e-5 * std::max(1.0, std::abs(d)));
  }
  CHECK_THROWS_AS(utility_derivative(pop, 0.0, alpha), domain_error);
}

TEST_CASE("utility is concave and maximised at the Bayesian rate") {
  const auto pop = biased_model();
  const Budget alpha(0.3);
  const double hi = std::min(1.0, 0.3 / 0.4);
  const int steps = 200;
  std::vector<double> q;
  for (int i = 1; i <= steps; ++i) q.push_back(utility(pop, hi * i / (steps + 1.0), alpha));
  for (std::size_t i = 1; i + 1 < q.size(); ++i) CHECK(q[i - 1] - 2 * q[i] + q[i + 1] <= 1e-8);
  const double golden = oracle::golden_section_max(
      [&](double x) { return utility(pop, x, alpha); }, 0.0, hi);
  CHECK(golden == Approx(optimal_rate(pop, alpha)).margin(1e-6));
  const double best = utility(pop, optimal_rate(pop, alpha), alpha);
  for (double v : q) CHECK(v <= best + 1e-10);
}

TEST_CASE("crossover budgets") {
  CHECK(crossover_budget_oblivious(fig_model()).value() == 0.5);
  CHECK(crossover_budget_bayesian(fig_model()).value() == 0.5);
  const double c = crossover_budget_oblivious(biased_model()).value();
  CHECK(c == Approx(oracle::norm_cdf(-1.0 / (std::sqrt(10.0) - std::sqrt(1.04)))).epsilon(1e-14));
  CHECK(c == Approx(0.3203).margin(1e-4));
  CHECK_FALSE(crossover_budget_oblivious(identical_model()).has_value());
  CHECK_FALSE(crossover_budget_bayesian(identical_model()).has_value());
  const PopulationModel shift({2.0, 1.0, 0.0, 1.0}, {0.0, 1.0, 0.0, 1.0}, 0.5);
  CHECK_FALSE(crossover_budget_bayesian(shift).has_value());
}

TEST_CASE("rates flip sign exactly at the crossover budget") {
  const auto pop = biased_model();
  const double c_obl = crossover_budget_oblivious(pop).value();
  const double c_opt = crossover_budget_bayesian(pop).value();
  for (double a = 0.005; a < 1.0; a += 0.005) {
    if (std::abs(a - c_obl) > 1e-3) {
      const auto o = selection_rates_oblivious(pop, Budget(a));
      CHECK((o.x_a > o.x_b) == (a < c_obl));
    }
    if (std::abs(a - c_opt) > 1e-3) {
      const auto b = selection_rates_bayesian(pop, Budget(a));
      CHECK((b.x_a < b.x_b) == (a < c_opt));
    }
  }
}

TEST_CASE("improvement region cases") {
  const auto sym = improvement_region(fig_model());
  CHECK(sym.alpha_min == 0.5);
  CHECK(sym.alpha_max == 0.5);
  CHECK(sym.hypothesis_holds);

  const PopulationModel less_biased({1.0, 1.0, -0.5, 3.0}, {1.0, 1.0, 0.0, 0.2}, 0.4);
  CHECK(improvement_region(less_biased).alpha_min == 0.5);

  const auto r = improvement_region(biased_model());
  CHECK(r.alpha_min == Approx(0.3203).margin(1e-4));
  CHECK(r.alpha_max == 0.5);

  const auto s = improvement_region(biased_model().swapped());
  CHECK(s.swapped);
  CHECK(s.alpha_min == Approx(r.alpha_min).epsilon(1e-14));
  CHECK(s.alpha_max == Approx(r.alpha_max).epsilon(1e-14));

  const PopulationModel violates({0.0, 1.0, 0.0, 1.0}, {0.0, 0.5, 0.0, 0.1}, 0.4);
  CHECK_FALSE(improvement_region(violates).hypothesis_holds);
}

TEST_CASE("improvement region separates help from harm on a fine grid") {
  const auto pop = biased_model();
  const auto r = improvement_region(pop);
  for (double a = 0.01; a < 1.0; a += 0.01) {
    if (a > r.alpha_min - 1e-3 && a < r.alpha_max + 1e-3) continue;
    const double q_dp = outcome(pop, Budget(a), Algorithm::demographic_parity, GammaLevel(1)).utility;
    const double q_fair = outcome(pop, Budget(a), Algorithm::gamma_oblivious, GammaLevel(0.8)).utility;
    const double q_obl = selection_rates_oblivious(pop, Budget(a)).utility;
    CHECK(q_dp > q_obl);
    CHECK(q_fair >= q_obl - 1e-12);
  }
  const auto harm = harm_interval(pop, linear_grid(0.01, 0.99, 99));
  REQUIRE(harm.has_value());
  CHECK(harm->first > r.alpha_min);
  CHECK(harm->second < r.alpha_max);
}

TEST_CASE("fairness cost bound examples") {
  const auto pop = fig_model();
  const auto b = fairness_cost_bound(pop, Budget(0.25), GammaLevel(1.0));
  CHECK(b.lower == 1.0);
  REQUIRE(b.simplified_upper.has_value());
  const double z = oracle::norm_quantile(0.75);
  const double g = 0.25 * z / oracle::norm_pdf(z);
  const double nu = std::sqrt(10.0) / std::sqrt(1.04);
  CHECK(*b.simplified_upper == Approx(1.0 + g * 0.4 * (nu - 1.0) / (0.4 + 0.6 * nu)).epsilon(1e-13));
  CHECK(*b.simplified_upper == Approx(1.197).margin(1e-3));
  const double ratio = selection_rates_bayesian(pop, Budget(0.25)).utility /
                       outcome(pop, Budget(0.25), Algorithm::demographic_parity, GammaLevel(1)).utility;
  CHECK(ratio >= 1.0);
  CHECK(ratio <= b.upper);
  CHECK(b.upper <= *b.simplified_upper + 1e-12);

  CHECK(fairness_cost_bound(pop, Budget(0.25), GammaLevel(0.0)).upper == 1.0);
  const auto flat = symmetric_model(1.0, 1.0, 0.5, 0.5, 0.4);
  CHECK(fairness_cost_bound(flat, Budget(0.25), GammaLevel(1.0)).upper == Approx(1.0).margin(1e-12));
  const PopulationModel negative({-1.0, 1.0, 0.0, 3.0}, {-1.0, 1.0, 0.0, 0.2}, 0.4);
  CHECK_FALSE(fairness_cost_bound(negative, Budget(0.25), GammaLevel(1.0)).hypothesis_holds);
}

TEST_CASE("fairness cost bound contains the true ratio on a parameter grid") {
  for (double sigma_a : {0.5, 1.0, 3.0}) {
    for (double mu_b : {0.5, 1.0, 2.0}) {
      const PopulationModel pop({1.0, 1.0, 0.0, sigma_a}, {mu_b, 1.0, 0.0, 0.2}, 0.4);
      for (double g : {0.5, 0.8, 1.0}) {
        for (double a = 0.02; a < 0.99; a += 0.04) {
          const auto b = fairness_cost_bound(pop, Budget(a), GammaLevel(g));
          const double q_opt = selection_rates_bayesian(pop, Budget(a)).utility;
          const double q_fair = outcome(pop, Budget(a), Algorithm::gamma_bayesian, GammaLevel(g)).utility;
          CHECK(q_opt / q_fair >= 1.0 - 1e-12);
          CHECK(q_opt / q_fair <= b.upper + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("small-budget limit") {
  CHECK(small_budget_limit(symmetric_model(1.0, 1.0, 0.5, 0.5, 0.4)) == 1.0);
  const auto pop = fig_model();
  const double t_a = 1.0 / std::sqrt(10.0);
  const double t_b = 1.0 / std::sqrt(1.04);
  CHECK(small_budget_limit(pop) == Approx(1.0 - 0.4 * (t_a - t_b) / (0.4 * t_a + 0.6 * t_b)).epsilon(1e-14));
  CHECK(small_budget_limit(pop) == Approx(1.3718).margin(1e-4));
  // At alpha = 1e-4 the bound is 1 - alpha g with g from the definition.
  const double z = oracle::norm_quantile(1.0 - 1e-4);
  const double q_dp = 1.0 + oracle::norm_pdf(z) / 1e-4 * (0.4 * t_a + 0.6 * t_b);
  const double g = 0.4 / 1e-4 * z * (t_a - t_b) / q_dp;
  CHECK(fairness_cost_bound(pop, Budget(1e-4), GammaLevel(1.0)).upper ==
        Approx(1.0 - 1e-4 * g).epsilon(1e-9));
  // The approach to the limit is slow (order 1/z); the gap shrinks monotonically.
  double gap = 1e300;
  for (double a : {1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12, 1e-14}) {
    const double next =
        std::abs(fairness_cost_bound(pop, Budget(a), GammaLevel(1.0)).upper - small_budget_limit(pop));
    CHECK(next < gap);
    gap = next;
  }
  // With zero means the gap is order 1/z^2 and falls below 1e-2.
  const auto centred = symmetric_model(0.0, 1.0, 3.0, 0.2, 0.4);
  CHECK(std::abs(fairness_cost_bound(centred, Budget(1e-15), GammaLevel(1.0)).upper -
                 small_budget_limit(centred)) <= 1e-2);
  CHECK(small_budget_limit(symmetric_model(1.0, 1.0, 3.0, 0.2, 1e-9)) == Approx(1.0).margin(1e-8));
}

TEST_CASE("parity cost ceiling limits") {
  CHECK(parity_cost_ceiling(symmetric_model(1.0, 1.0, 0.2, 0.2, 0.4)) == 1.0);
  const double s_b = std::sqrt(1.04);
  const double big = std::sqrt(1e12 * s_b * s_b - 1.0);
  CHECK(parity_cost_ceiling(symmetric_model(1.0, 1.0, big, 0.2, 0.4)) ==
        Approx(1.0 / 0.6).margin(1e-3));
}

TEST_CASE("sweep cardinality, ordering and inline errors") {
  const auto pop = fig_model();
  const auto grid = linear_grid(0.01, 0.99, 99);
  const Algorithm algs[] = {Algorithm::oblivious, Algorithm::bayesian,
                            Algorithm::demographic_parity};
  const auto rows = sweep(pop, grid, algs, GammaLevel(0.8));
  REQUIRE(rows.size() == 297);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].alpha == grid[i / 3]);
    CHECK(rows[i].algorithm == algs[i % 3]);
    CHECK(rows[i].error.empty());
    CHECK(std::abs(0.4 * rows[i].x_a + 0.6 * rows[i].x_b - rows[i].alpha) <= 1e-9);
  }
  const auto& mid_obl = rows[49 * 3];
  const auto& mid_dp = rows[49 * 3 + 2];
  REQUIRE(mid_obl.alpha == 0.5);
  CHECK(mid_dp.utility == Approx(mid_obl.utility).margin(1e-9));

  const std::vector<double> bad{0.2, 1.5, 0.4};
  const auto rows2 = sweep(pop, bad, algs, GammaLevel(0.8));
  REQUIRE(rows2.size() == 9);
  CHECK(rows2[0].error.empty());
  CHECK_FALSE(rows2[3].error.empty());
  CHECK(std::isnan(rows2[3].utility));
  CHECK(rows2[6].error.empty());
}

TEST_CASE("gamma-fair variants coincide at parity") {
  const auto pop = biased_model();
  for (double a : {0.1, 0.5, 0.9}) {
    const auto o = outcome(pop, Budget(a), Algorithm::gamma_oblivious, GammaLevel(1.0));
    const auto b = outcome(pop, Budget(a), Algorithm::gamma_bayesian, GammaLevel(1.0));
    CHECK(o.x_a == b.x_a);
    CHECK(o.utility == b.utility);
  }
}

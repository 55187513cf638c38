// Acceptance checks, one line per criterion. Exit status is non-zero if any
// criterion fails. Tolerances and runtime limits are fixed here, not tuned.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fairsel/fairsel.hpp"
#include "support/oracles.hpp"

using namespace fairsel;
using namespace fairsel::asymptotic;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

using Check = std::function<void(Verdict&)>;

int failures = 0;

void criterion(int id, const char* name, double limit_s, const Check& body) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.require(false, std::string("exception: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= limit_s) {
    v.require(false, "runtime " + std::to_string(secs) + " s exceeds " + std::to_string(limit_s) + " s");
  }
  if (!v.pass) ++failures;
  std::printf("[%s] %d %s (%.2f s / %.0f s) %s\n", v.pass ? "PASS" : "FAIL", id, name, secs,
              limit_s, v.detail.str().c_str());
  std::fflush(stdout);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

PopulationModel standard_model() { return symmetric_model(1.0, 1.0, 3.0, 0.2, 0.4); }

PopulationModel random_model(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> mu(0.0, 2.0), eta(0.5, 2.0), beta(-1.0, 1.0),
      sigma(0.1, 3.0), p(0.1, 0.9);
  return PopulationModel({mu(gen), eta(gen), beta(gen), sigma(gen)},
                         {mu(gen), eta(gen), beta(gen), sigma(gen)}, p(gen));
}

std::pair<double, double> feasible_rates(const PopulationModel& pop, double alpha) {
  return {std::max(0.0, (alpha - pop.p_b()) / pop.p_a()), std::min(1.0, alpha / pop.p_a())};
}

// ---- 1 -------------------------------------------------------------------

void crossover_signs(Verdict& v) {
  const auto pop = standard_model();
  int checked = 0;
  for (double a : linear_grid(0.01, 0.99, 99)) {
    const auto o = selection_rates_oblivious(pop, Budget(a));
    const auto b = selection_rates_bayesian(pop, Budget(a));
    if (a == 0.5) {
      v.require(std::abs(o.x_a - o.x_b) <= 1e-9, "oblivious rates differ at alpha = 0.5");
      v.require(std::abs(b.x_a - b.x_b) <= 1e-9, "Bayesian rates differ at alpha = 0.5");
    } else {
      v.require((o.x_a > o.x_b) == (a < 0.5), "oblivious sign at alpha = " + fmt(a));
      v.require((b.x_a < b.x_b) == (a < 0.5), "Bayesian sign at alpha = " + fmt(a));
    }
    ++checked;
  }
  v.detail << checked << " budgets";
}

// ---- 2 -------------------------------------------------------------------

void utility_ordering(Verdict& v) {
  const auto pop = standard_model();
  double min_gap = 1e300;
  for (double a : linear_grid(0.01, 0.99, 99)) {
    const double q_obl = selection_rates_oblivious(pop, Budget(a)).utility;
    const double q_fair = outcome(pop, Budget(a), Algorithm::gamma_oblivious, GammaLevel(0.8)).utility;
    const double q_dp = outcome(pop, Budget(a), Algorithm::demographic_parity, GammaLevel(1.0)).utility;
    if (a == 0.5) {
      v.require(std::abs(q_dp - q_obl) <= 1e-9 && std::abs(q_fair - q_obl) <= 1e-9,
                "utilities differ at alpha = 0.5");
    } else {
      v.require(q_dp > q_fair, "Q_dp <= Q_fair at alpha = " + fmt(a));
      v.require(q_fair >= q_obl, "Q_fair < Q_obl at alpha = " + fmt(a));
      min_gap = std::min(min_gap, q_dp - q_obl);
    }
  }
  v.detail << "min Q_dp - Q_obl off 0.5 = " << fmt(min_gap);
}

// ---- 3 -------------------------------------------------------------------

void concavity_and_optimum(Verdict& v) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> budget(0.05, 0.95);
  double worst_second = -1e300, worst_deriv = 0.0, worst_argmax = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto pop = random_model(gen);
    const Budget alpha(budget(gen));
    const auto [lo, hi] = feasible_rates(pop, alpha);
    const int points = 200;
    const double step = (hi - lo) / (points + 1);
    std::vector<double> x(points), q(points);
    for (int i = 0; i < points; ++i) {
      x[i] = lo + step * (i + 1);
      q[i] = utility(pop, x[i], alpha);
    }
    for (int i = 1; i + 1 < points; ++i) {
      worst_second = std::max(worst_second, q[i - 1] - 2 * q[i] + q[i + 1]);
    }
    const double h = 1e-6 * (hi - lo);
    for (int i = 0; i < points; ++i) {
      const double fd = (utility(pop, x[i] + h, alpha) - utility(pop, x[i] - h, alpha)) / (2 * h);
      const double d = utility_derivative(pop, x[i], alpha);
      worst_deriv = std::max(worst_deriv, std::abs(fd - d) / std::max(std::abs(d), 1.0));
    }
    const double golden =
        oracle::golden_section_max([&](double t) { return utility(pop, t, alpha); }, lo, hi);
    worst_argmax = std::max(worst_argmax, std::abs(golden - optimal_rate(pop, alpha)));
  }
  v.require(worst_second <= 1e-8, "second difference " + fmt(worst_second) + " > 1e-8");
  v.require(worst_deriv <= 1e-5, "derivative error " + fmt(worst_deriv) + " > 1e-5");
  v.require(worst_argmax <= 1e-6, "argmax gap " + fmt(worst_argmax) + " > 1e-6");
  v.detail << "max second diff " << fmt(worst_second) << ", max derivative error "
           << fmt(worst_deriv) << ", max argmax gap " << fmt(worst_argmax);
}

// ---- 4 -------------------------------------------------------------------

// Group-independent, unbiased model with sigma_hat_A / sigma_hat_B = nu.
PopulationModel ratio_model(double nu, double p_a) {
  const double s_b = 0.2;
  const double hat_b = std::sqrt(1.0 + s_b * s_b);
  const double s_a = std::sqrt(nu * nu * hat_b * hat_b - 1.0);
  return symmetric_model(1.0, 1.0, s_a, s_b, p_a);
}

void cost_bounds(Verdict& v) {
  int checked = 0;
  double worst_excess = -1e300;
  for (double nu = 1.1; nu <= 15.0 + 1e-9; nu += 0.5) {
    for (double p_a : {0.1, 0.4, 0.7}) {
      const auto pop = ratio_model(nu, p_a);
      for (double g : {0.5, 0.8, 1.0}) {
        for (double a : linear_grid(0.01, 0.5, 50)) {
          const auto bound = fairness_cost_bound(pop, Budget(a), GammaLevel(g));
          const double q_opt = selection_rates_bayesian(pop, Budget(a)).utility;
          const double q_fair = outcome(pop, Budget(a), Algorithm::gamma_bayesian, GammaLevel(g)).utility;
          const double r = q_opt / q_fair;
          v.require(r >= 1.0 - 1e-12, "ratio below 1 at nu = " + fmt(nu) + ", alpha = " + fmt(a));
          v.require(r <= bound.upper + 1e-12,
                    "ratio above bound at nu = " + fmt(nu) + ", p_a = " + fmt(p_a) +
                        ", gamma = " + fmt(g) + ", alpha = " + fmt(a));
          worst_excess = std::max(worst_excess, r - bound.upper);
          ++checked;
        }
      }
    }
  }
  // nu -> 1: bound and ceiling collapse to 1.
  const auto near_one = ratio_model(1.0 + 1e-7, 0.4);
  double near_one_gap = std::abs(parity_cost_ceiling(near_one) - 1.0);
  for (double a : {0.05, 0.25, 0.5}) {
    near_one_gap = std::max(
        near_one_gap, std::abs(fairness_cost_bound(near_one, Budget(a), GammaLevel(1.0)).upper - 1.0));
  }
  v.require(near_one_gap <= 1e-3, "bound does not tend to 1 as nu -> 1");
  // nu -> infinity: the parity ceiling tends to 1 / (1 - p_A).
  double far_gap = 0.0;
  for (double p_a : {0.1, 0.4, 0.7}) {
    const double ceiling = parity_cost_ceiling(ratio_model(1e6, p_a));
    far_gap = std::max(far_gap, std::abs(ceiling - 1.0 / (1.0 - p_a)));
  }
  v.require(far_gap <= 1e-3, "ceiling misses 1/(1 - p_A) by " + fmt(far_gap));
  v.detail << checked << " points, max ratio - bound " << fmt(worst_excess) << ", nu->1 gap "
           << fmt(near_one_gap) << ", nu->1e6 gap " << fmt(far_gap);
}

// ---- 5 -------------------------------------------------------------------

void improvement_regions(Verdict& v) {
  const auto equal_bias = PopulationModel({1.0, 1.0, 0.3, 3.0}, {1.0, 1.0, 0.3, 0.2}, 0.4);
  const auto r1 = improvement_region(equal_bias);
  v.require(r1.alpha_min == 0.5 && r1.alpha_max == 0.5, "equal bias region is not {1/2}");

  const auto less_biased = PopulationModel({1.0, 1.0, -0.5, 3.0}, {1.0, 1.0, 0.0, 0.2}, 0.4);
  v.require(improvement_region(less_biased).alpha_min == 0.5, "alpha_min != 1/2 when beta_A < beta_B");

  const auto biased = PopulationModel({1.0, 1.0, 1.0, 3.0}, {1.0, 1.0, 0.0, 0.2}, 0.4);
  const auto r3 = improvement_region(biased);
  double harm_lo = 1.0, harm_hi = 0.0;
  for (double a : linear_grid(0.001, 0.999, 999)) {
    const double gap = outcome(biased, Budget(a), Algorithm::demographic_parity, GammaLevel(1.0)).utility -
                       selection_rates_oblivious(biased, Budget(a)).utility;
    if (gap < 0.0) {
      harm_lo = std::min(harm_lo, a);
      harm_hi = std::max(harm_hi, a);
      v.require(a > r3.alpha_min && a < r3.alpha_max, "harm outside the region at alpha = " + fmt(a));
    }
  }
  v.require(harm_lo <= harm_hi, "no strict-harm budget found");
  v.detail << "region [" << fmt(r3.alpha_min) << ", " << fmt(r3.alpha_max) << "], harm on ["
           << fmt(harm_lo) << ", " << fmt(harm_hi) << "]";
}

// ---- 6 -------------------------------------------------------------------

void closed_form_vs_integration(Verdict& v) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> budget(0.05, 0.95), unit(0.05, 0.95);
  double worst = 0.0, worst_dp = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto pop = random_model(gen);
    const Budget alpha(budget(gen));
    const auto [lo, hi] = feasible_rates(pop, alpha);
    const double x_a = lo + unit(gen) * (hi - lo);
    worst = std::max(worst, std::abs(utility(pop, x_a, alpha) -
                                     oracle::utility_by_integration(pop, x_a, alpha)));
    const double z = oracle::norm_quantile(1.0 - alpha);
    const double total = pop.p_a() * pop.a().mu + pop.p_b() * pop.b().mu +
                         oracle::norm_pdf(z) / alpha *
                             (pop.p_a() * pop.stats(Group::A).sigma_tilde +
                              pop.p_b() * pop.stats(Group::B).sigma_tilde);
    const double q_dp = outcome(pop, alpha, Algorithm::demographic_parity, GammaLevel(1.0)).utility;
    worst_dp = std::max(worst_dp, std::abs(q_dp - total));
  }
  v.require(worst <= 1e-6, "closed form vs integration " + fmt(worst) + " > 1e-6");
  v.require(worst_dp <= 1e-12, "parity utility vs total expectation " + fmt(worst_dp) + " > 1e-12");
  v.detail << "max |Q - integral| " << fmt(worst) << ", max |Q_dp - total expectation| "
           << fmt(worst_dp);
}

// ---- 7 -------------------------------------------------------------------

void finite_population(Verdict& v) {
  const auto spec = mc::CohortSpec::from_model(standard_model());
  const std::size_t K = 2000;
  const std::vector<Algorithm> algs(std::begin(all_algorithms), std::end(all_algorithms));

  std::vector<std::size_t> ms100;
  for (std::size_t m = 10; m <= 100; m += 10) ms100.push_back(m);
  const auto rep100 = mc::replicate(spec, 100, ms100, K, 7, algs, 0.8);
  int outside = 0;
  double worst_z = 0.0;
  std::string worst_at;
  for (const auto& s : rep100.summaries) {
    const double gap = std::abs(s.mean_utility - s.asymptotic_utility);
    const double z = s.ci_halfwidth > 0 ? gap / s.ci_halfwidth : (gap > 0 ? INFINITY : 0.0);
    if (z > 3.0) ++outside;
    if (z > worst_z) {
      worst_z = z;
      worst_at = std::string(to_string(s.algorithm)) + " m=" + std::to_string(s.m);
    }
  }
  v.require(outside == 0, std::to_string(outside) + " of " +
                              std::to_string(rep100.summaries.size()) +
                              " utility means beyond 3 CI");

  std::vector<std::size_t> ms50;
  for (std::size_t m = 5; m <= 50; m += 5) ms50.push_back(m);
  const Algorithm ratio_algs[] = {Algorithm::oblivious, Algorithm::demographic_parity};
  const auto rep50 = mc::replicate(spec, 50, ms50, K, 8, ratio_algs, 1.0);
  int ratio_outside = 0;
  double worst_ratio_z = 0.0;
  for (const auto* rep : {&rep50, &rep100}) {
    for (const auto& r : rep->ratios) {
      if (r.name != "ratio_dp_obl") continue;
      const double gap = std::abs(r.mean - r.asymptotic);
      const double z = r.ci_halfwidth > 0 ? gap / r.ci_halfwidth : (gap > 0 ? INFINITY : 0.0);
      worst_ratio_z = std::max(worst_ratio_z, z);
      if (z > 3.0) ++ratio_outside;
    }
  }
  v.require(ratio_outside == 0, std::to_string(ratio_outside) + " ratio means beyond 3 CI");
  v.detail << "worst utility gap " << fmt(worst_z) << " CI (" << worst_at << "), worst ratio gap "
           << fmt(worst_ratio_z) << " CI";
}

// ---- 8 -------------------------------------------------------------------

void non_normal_priors(Verdict& v) {
  const QualityPrior priors[] = {UniformPrior{0.0, 1.0}, BetaPrior{2.0, 5.0}, ParetoPrior{1.0, 3.0}};
  const std::size_t n = 10000;
  std::vector<std::size_t> ms;
  for (double a : linear_grid(0.02, 0.99, 98)) ms.push_back(static_cast<std::size_t>(std::lround(a * n)));
  const Algorithm algs[] = {Algorithm::oblivious, Algorithm::demographic_parity};
  double best_small = 0.0, worst = 1e300;
  std::uint64_t seed = 80;
  for (const auto& prior : priors) {
    mc::CohortSpec spec;
    spec.prior = {prior, prior};
    spec.sigma = {3.0, 0.2};
    spec.p_a = 0.4;
    const auto rep = mc::replicate(spec, n, ms, 1, seed++, algs, 1.0);
    for (const auto& r : rep.ratios) {
      worst = std::min(worst, r.mean);
      v.require(r.mean >= 0.99, prior.name() + ": ratio " + fmt(r.mean) + " at m = " + std::to_string(r.m));
      if (r.m == ms.front()) {
        best_small = std::max(best_small, r.mean);
        v.detail << prior.name() << " ratio at 2% " << fmt(r.mean) << "; ";
      }
    }
  }
  v.require(best_small > 1.2, "no prior gains more than 20% at alpha = 0.02");
  v.detail << "min ratio over grid " << fmt(worst);
}

// ---- 9 -------------------------------------------------------------------

double score_sum(const std::vector<double>& s, const mc::SelectionResult& r) {
  double t = 0.0;
  for (auto i : r.selected) t += s[i];
  return t;
}

double best_with_quotas(const std::vector<double>& s, const mc::Cohort& c, std::size_t m,
                        std::size_t q_a, std::size_t q_b) {
  double best = -1e300;
  for (std::uint32_t mask = 0; mask < (1u << s.size()); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != m) continue;
    std::size_t a = 0;
    double t = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!(mask & (1u << i))) continue;
      t += s[i];
      a += c.candidates[i].group == Group::A;
    }
    if (a >= q_a && m - a >= q_b) best = std::max(best, t);
  }
  return best;
}

void small_cohorts(Verdict& v) {
  std::mt19937_64 gen(9);
  std::uniform_int_distribution<std::size_t> size(4, 12);
  std::uniform_real_distribution<double> gamma_d(0.0, 1.0);
  int cohorts = 0, exact = 0, fair_checks = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto pop = random_model(gen);
    const std::size_t n = size(gen);
    mc::CohortSpec spec = mc::CohortSpec::from_model(pop);
    spec.p_a = std::clamp(pop.p_a(), 1.0 / static_cast<double>(n), 1.0 - 1.0 / static_cast<double>(n));
    const auto c = mc::generate_cohort(spec, n, 900, static_cast<std::uint32_t>(trial));
    std::vector<double> obl(n), bay(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& g = pop.group(c.candidates[i].group);
      const double w = g.eta * g.eta / (g.eta * g.eta + g.sigma * g.sigma);
      obl[i] = c.candidates[i].w_hat;
      bay[i] = w * (c.candidates[i].w_hat + g.beta) + (1.0 - w) * g.mu;
    }
    const mc::CohortSelector sel(c, mc::Scoring::closed_form_normal, true);
    const double gamma = gamma_d(gen);
    for (std::size_t m = 1; m <= n; ++m) {
      const auto so = sel.select(Algorithm::oblivious, m, gamma);
      const auto sb = sel.select(Algorithm::bayesian, m, gamma);
      v.require(std::abs(score_sum(obl, so) - oracle::best_subset_sum(obl, m)) <= 1e-9,
                "oblivious top-m is not optimal");
      v.require(std::abs(score_sum(bay, sb) - oracle::best_subset_sum(bay, m)) <= 1e-9,
                "Bayesian top-m is not optimal");
      for (Algorithm alg : {Algorithm::gamma_oblivious, Algorithm::gamma_bayesian}) {
        const auto& s = alg == Algorithm::gamma_oblivious ? obl : bay;
        const auto r = sel.select(alg, m, gamma);
        const auto q = mc::gamma_quotas(m, c.n_a, c.n_b, gamma);
        v.require(std::abs(score_sum(s, r) - best_with_quotas(s, c, m, q[0], q[1])) <= 1e-9,
                  "gamma-fair selection is not the constrained optimum");
        const double na = static_cast<double>(c.n_a), nb = static_cast<double>(c.n_b);
        const double ca = static_cast<double>(r.count_a), cb = static_cast<double>(r.count_b);
        // Each inequality must hold once one selected candidate changes group.
        const bool rule_a = (ca + 1.0) / na >= gamma * (cb - 1.0) / nb - 1e-12;
        const bool rule_b = (cb + 1.0) / nb >= gamma * (ca - 1.0) / na - 1e-12;
        if (ca / na >= gamma * cb / nb - 1e-12 && cb / nb >= gamma * ca / na - 1e-12) ++exact;
        ++fair_checks;
        v.require(rule_a && rule_b, "gamma rule violated by more than one candidate (n = " +
                                        std::to_string(n) + ", m = " + std::to_string(m) + ")");
      }
    }
    ++cohorts;
  }
  v.detail << cohorts << " cohorts, gamma rule exact in " << exact << " of " << fair_checks
           << " fair selections";
}

}  // namespace

int main() {
  criterion(1, "crossover signs of the selection rates", 1.0, crossover_signs);
  criterion(2, "parity >= gamma-fair >= oblivious utility ordering", 1.0, utility_ordering);
  criterion(3, "utility concavity, derivative and optimum", 30.0, concavity_and_optimum);
  criterion(4, "fairness cost bounds and their limits", 30.0, cost_bounds);
  criterion(5, "improvement region cases and strict harm", 5.0, improvement_regions);
  criterion(6, "closed-form utility vs direct integration", 60.0, closed_form_vs_integration);
  criterion(7, "finite-population means vs large-population utility", 300.0, finite_population);
  criterion(8, "non-normal priors: parity never costs, can gain", 180.0, non_normal_priors);
  criterion(9, "small cohorts vs brute-force enumeration", 30.0, small_cohorts);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

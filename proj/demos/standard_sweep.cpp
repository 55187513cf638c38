// Prints the large-population curves for the standard two-group example:
// N(1, 1) quality in both groups, noise 3 for group A and 0.2 for group B,
// 40% of candidates in group A.

#include <cstdio>
#include <vector>

#include "fairsel/fairsel.hpp"

int main() {
  using namespace fairsel;
  const auto pop = symmetric_model(1.0, 1.0, 3.0, 0.2, 0.4);
  const std::vector<double> grid = linear_grid(0.05, 0.95, 19);
  const Algorithm algs[] = {Algorithm::oblivious, Algorithm::bayesian,
                            Algorithm::demographic_parity};

  std::printf("%6s %10s %10s %10s %12s %12s %10s\n", "alpha", "Q_obl", "Q_opt", "Q_dp",
              "Q_dp/Q_obl", "Q_opt/Q_dp", "bound");
  const auto rows = asymptotic::sweep(pop, grid, algs, GammaLevel(1.0));
  for (std::size_t i = 0; i < rows.size(); i += 3) {
    const double alpha = rows[i].alpha;
    const auto bound = asymptotic::fairness_cost_bound(pop, Budget(alpha), GammaLevel(1.0));
    std::printf("%6.2f %10.5f %10.5f %10.5f %12.5f %12.5f %10.5f\n", alpha, rows[i].utility,
                rows[i + 1].utility, rows[i + 2].utility, rows[i].ratio_dp_obl,
                rows[i].ratio_opt_dp, bound.upper);
  }

  const auto region = asymptotic::improvement_region(pop);
  std::printf("\nimprovement region [%.4f, %.4f]\n", region.alpha_min, region.alpha_max);
  std::printf("small-budget limit of the parity cost bound: %.5f\n",
              asymptotic::small_budget_limit(pop));
  return 0;
}

#pragma once

// Two-group population model: latent quality W ~ N(mu, eta^2) per group and
// an estimate W_hat = W - beta + sigma * eps. The posterior mean E[W | W_hat]
// is an affine shrinkage of the (bias-corrected) estimate towards mu.

#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "fairsel/errors.hpp"

namespace fairsel {

enum class Group { A = 0, B = 1 };

[[nodiscard]] inline constexpr Group other(Group g) noexcept {
  return g == Group::A ? Group::B : Group::A;
}

[[nodiscard]] inline const char* to_string(Group g) noexcept { return g == Group::A ? "A" : "B"; }

struct GroupParams {
  double mu = 0.0;     // mean latent quality
  double eta = 1.0;    // latent quality standard deviation
  double beta = 0.0;   // estimator bias (W_hat is centred at mu - beta)
  double sigma = 0.0;  // estimator noise standard deviation

  friend bool operator==(const GroupParams&, const GroupParams&) = default;
};

// Standard deviations of the estimate and of the posterior mean.
struct DerivedStats {
  double sigma_hat = 0.0;    // sqrt(sigma^2 + eta^2)
  double sigma_tilde = 0.0;  // eta^2 / sigma_hat
};

[[nodiscard]] inline DerivedStats derived_stats(const GroupParams& g) {
  if (!std::isfinite(g.mu) || !std::isfinite(g.eta) || !std::isfinite(g.beta) ||
      !std::isfinite(g.sigma)) {
    throw domain_error("group parameters must be finite");
  }
  if (g.eta < 0.0 || g.sigma < 0.0) {
    throw domain_error("eta and sigma must be non-negative");
  }
  if (g.eta == 0.0 && g.sigma == 0.0) {
    throw degenerate_model_error("eta and sigma are both zero: the estimate has no variance");
  }
  const double sigma_hat = std::hypot(g.sigma, g.eta);
  return {sigma_hat, g.eta * g.eta / sigma_hat};
}

// Weight eta^2 / (eta^2 + sigma^2) placed on the estimate by the posterior mean.
[[nodiscard]] inline double shrinkage_weight(const GroupParams& g) {
  if (g.sigma == 0.0) return 1.0;
  const double eta2 = g.eta * g.eta;
  return eta2 / (eta2 + g.sigma * g.sigma);
}

// E[W | W_hat = w_hat] for a candidate of group g.
[[nodiscard]] inline double posterior_mean(double w_hat, const GroupParams& g) {
  (void)derived_stats(g);
  if (g.sigma == 0.0) return w_hat + g.beta;
  const double w = shrinkage_weight(g);
  return w * (w_hat + g.beta) + (1.0 - w) * g.mu;
}

// Inverse of posterior_mean in w_hat; requires eta > 0.
[[nodiscard]] inline double estimate_for_posterior(double posterior, const GroupParams& g) {
  (void)derived_stats(g);
  if (g.eta == 0.0) {
    throw degenerate_model_error("posterior mean is constant when eta = 0; no inverse exists");
  }
  if (g.sigma == 0.0) return posterior - g.beta;
  return (posterior - g.mu) / shrinkage_weight(g) + g.mu - g.beta;
}

// Global selection ratio alpha in (0, 1).
class Budget {
 public:
  explicit Budget(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw domain_error("budget alpha must lie in (0, 1), got " + std::to_string(alpha));
    }
  }
  [[nodiscard]] double value() const noexcept { return alpha_; }
  operator double() const noexcept { return alpha_; }  // NOLINT(google-explicit-constructor)

 private:
  double alpha_;
};

// gamma in [0, 1]: 0 is unconstrained, 0.8 the four-fifths rule, 1 demographic parity.
class GammaLevel {
 public:
  explicit GammaLevel(double gamma) : gamma_(gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
      throw domain_error("gamma must lie in [0, 1], got " + std::to_string(gamma));
    }
  }
  [[nodiscard]] double value() const noexcept { return gamma_; }
  operator double() const noexcept { return gamma_; }  // NOLINT(google-explicit-constructor)

 private:
  double gamma_;
};

class PopulationModel {
 public:
  // eta = 0 in either group (posterior collapses to mu) is rejected unless
  // allow_degenerate is set.
  PopulationModel(GroupParams a, GroupParams b, double p_a, bool allow_degenerate = false)
      : groups_{a, b}, p_a_(p_a), allow_degenerate_(allow_degenerate) {
    if (!(p_a > 0.0 && p_a < 1.0)) {
      throw domain_error("p_a must lie in (0, 1), got " + std::to_string(p_a));
    }
    for (int i = 0; i < 2; ++i) {
      stats_[i] = derived_stats(groups_[i]);
      if (groups_[i].eta == 0.0 && !allow_degenerate) {
        throw degenerate_model_error(std::string("eta is zero for group ") +
                                     to_string(static_cast<Group>(i)) +
                                     "; pass allow_degenerate to accept a constant posterior");
      }
    }
  }

  [[nodiscard]] const GroupParams& group(Group g) const noexcept {
    return groups_[static_cast<int>(g)];
  }
  [[nodiscard]] const GroupParams& a() const noexcept { return groups_[0]; }
  [[nodiscard]] const GroupParams& b() const noexcept { return groups_[1]; }
  [[nodiscard]] const DerivedStats& stats(Group g) const noexcept {
    return stats_[static_cast<int>(g)];
  }
  [[nodiscard]] double p_a() const noexcept { return p_a_; }
  [[nodiscard]] double p_b() const noexcept { return 1.0 - p_a_; }
  [[nodiscard]] double share(Group g) const noexcept { return g == Group::A ? p_a() : p_b(); }
  [[nodiscard]] bool allow_degenerate() const noexcept { return allow_degenerate_; }

  // The same population with the group labels exchanged.
  [[nodiscard]] PopulationModel swapped() const {
    return PopulationModel(groups_[1], groups_[0], 1.0 - p_a_, allow_degenerate_);
  }

  friend bool operator==(const PopulationModel& l, const PopulationModel& r) {
    return l.groups_ == r.groups_ && l.p_a_ == r.p_a_;
  }

 private:
  std::array<GroupParams, 2> groups_;
  std::array<DerivedStats, 2> stats_{};
  double p_a_;
  bool allow_degenerate_;
};

// Group-independent N(mu, eta^2) quality, unbiased estimates; only sigma differs.
[[nodiscard]] inline PopulationModel symmetric_model(double mu, double eta, double sigma_a,
                                                     double sigma_b, double p_a) {
  return PopulationModel({mu, eta, 0.0, sigma_a}, {mu, eta, 0.0, sigma_b}, p_a);
}

}  // namespace fairsel

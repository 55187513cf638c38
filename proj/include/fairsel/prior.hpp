#pragma once

// Latent-quality distributions for simulated cohorts, and the posterior mean
// E[W | W_hat] under Gaussian estimation noise for an arbitrary prior.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "fairsel/errors.hpp"
#include "fairsel/numeric.hpp"
#include "fairsel/rng.hpp"
#include "fairsel/stdnorm.hpp"

namespace fairsel {

struct NormalPrior {
  double mu = 0.0;
  double eta = 1.0;
};

struct UniformPrior {
  double lo = 0.0;
  double hi = 1.0;
};

struct BetaPrior {
  double shape_a = 1.0;
  double shape_b = 1.0;
};

// Density shape * scale^shape / w^(shape + 1) on [scale, inf).
struct ParetoPrior {
  double scale = 1.0;
  double shape = 3.0;
};

namespace detail {

// Gamma(shape, 1) by Marsaglia and Tsang. Attempt k consumes the uniform pair
// at block (tag << 16) | k, so the draw depends only on the counter.
inline double sample_gamma(double shape, const rng::CounterRng& gen, std::uint32_t replication,
                           std::uint32_t candidate, std::uint32_t tag) {
  double boost = 1.0;
  if (shape < 1.0) {
    const double u = gen.uniform(replication, candidate, rng::Stream::extra, (tag << 16) | 0xFFFFu);
    boost = std::pow(u, 1.0 / shape);
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (std::uint32_t attempt = 0; attempt < 0xFFFFu; ++attempt) {
    const auto [u1, u2] = gen.uniform_pair(replication, candidate, rng::Stream::extra,
                                           (tag << 16) | attempt);
    const double x = stdnorm::quantile(u1);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    if (std::log(u2) < 0.5 * x * x + d - d * v + d * std::log(v)) return boost * d * v;
  }
  throw numeric_error("gamma sampler did not accept within the attempt budget");
}

}  // namespace detail

class QualityPrior {
 public:
  using Kind = std::variant<NormalPrior, UniformPrior, BetaPrior, ParetoPrior>;

  QualityPrior() : kind_(NormalPrior{}) {}
  QualityPrior(Kind kind) : kind_(kind) { validate(); }  // NOLINT(google-explicit-constructor)
  QualityPrior(NormalPrior p) : QualityPrior(Kind(p)) {}    // NOLINT(google-explicit-constructor)
  QualityPrior(UniformPrior p) : QualityPrior(Kind(p)) {}   // NOLINT(google-explicit-constructor)
  QualityPrior(BetaPrior p) : QualityPrior(Kind(p)) {}      // NOLINT(google-explicit-constructor)
  QualityPrior(ParetoPrior p) : QualityPrior(Kind(p)) {}    // NOLINT(google-explicit-constructor)

  [[nodiscard]] const Kind& kind() const noexcept { return kind_; }
  [[nodiscard]] bool is_normal() const noexcept {
    return std::holds_alternative<NormalPrior>(kind_);
  }

  [[nodiscard]] std::string name() const {
    return std::visit(
        [](const auto& p) -> std::string {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, NormalPrior>) return "normal";
          if constexpr (std::is_same_v<T, UniformPrior>) return "uniform";
          if constexpr (std::is_same_v<T, BetaPrior>) return "beta";
          if constexpr (std::is_same_v<T, ParetoPrior>) return "pareto";
        },
        kind_);
  }

  [[nodiscard]] double mean() const {
    return std::visit(
        [](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, NormalPrior>) return p.mu;
          if constexpr (std::is_same_v<T, UniformPrior>) return 0.5 * (p.lo + p.hi);
          if constexpr (std::is_same_v<T, BetaPrior>) return p.shape_a / (p.shape_a + p.shape_b);
          if constexpr (std::is_same_v<T, ParetoPrior>) {
            if (p.shape <= 1.0) return std::numeric_limits<double>::infinity();
            return p.shape * p.scale / (p.shape - 1.0);
          }
        },
        kind_);
  }

  [[nodiscard]] double sd() const {
    return std::visit(
        [](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, NormalPrior>) return p.eta;
          if constexpr (std::is_same_v<T, UniformPrior>) return (p.hi - p.lo) / std::sqrt(12.0);
          if constexpr (std::is_same_v<T, BetaPrior>) {
            const double s = p.shape_a + p.shape_b;
            return std::sqrt(p.shape_a * p.shape_b / (s * s * (s + 1.0)));
          }
          if constexpr (std::is_same_v<T, ParetoPrior>) {
            if (p.shape <= 2.0) return std::numeric_limits<double>::infinity();
            const double a = p.shape;
            return p.scale / (a - 1.0) * std::sqrt(a / (a - 2.0));
          }
        },
        kind_);
  }

  // Closed support; infinite ends are +-inf.
  [[nodiscard]] std::array<double, 2> support() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return std::visit(
        [](const auto& p) -> std::array<double, 2> {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, NormalPrior>) return {-inf, inf};
          if constexpr (std::is_same_v<T, UniformPrior>) return {p.lo, p.hi};
          if constexpr (std::is_same_v<T, BetaPrior>) return {0.0, 1.0};
          if constexpr (std::is_same_v<T, ParetoPrior>) return {p.scale, inf};
        },
        kind_);
  }

  [[nodiscard]] double pdf(double w) const {
    return std::visit(
        [w](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, NormalPrior>) {
            return stdnorm::pdf((w - p.mu) / p.eta) / p.eta;
          }
          if constexpr (std::is_same_v<T, UniformPrior>) {
            return (w >= p.lo && w <= p.hi) ? 1.0 / (p.hi - p.lo) : 0.0;
          }
          if constexpr (std::is_same_v<T, BetaPrior>) {
            if (w <= 0.0 || w >= 1.0) return 0.0;
            const double log_norm = std::lgamma(p.shape_a + p.shape_b) - std::lgamma(p.shape_a) -
                                    std::lgamma(p.shape_b);
            return std::exp(log_norm + (p.shape_a - 1.0) * std::log(w) +
                            (p.shape_b - 1.0) * std::log1p(-w));
          }
          if constexpr (std::is_same_v<T, ParetoPrior>) {
            if (w < p.scale) return 0.0;
            return p.shape / p.scale * std::pow(p.scale / w, p.shape + 1.0);
          }
        },
        kind_);
  }

  // Draw for one candidate; a pure function of the counter.
  [[nodiscard]] double sample(const rng::CounterRng& gen, std::uint32_t replication,
                              std::uint32_t candidate) const {
    const double u = gen.uniform(replication, candidate, rng::Stream::quality);
    return std::visit(
        [&](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, NormalPrior>) return p.mu + p.eta * stdnorm::quantile(u);
          if constexpr (std::is_same_v<T, UniformPrior>) return p.lo + (p.hi - p.lo) * u;
          if constexpr (std::is_same_v<T, BetaPrior>) {
            const double x = detail::sample_gamma(p.shape_a, gen, replication, candidate, 1);
            const double y = detail::sample_gamma(p.shape_b, gen, replication, candidate, 2);
            return x / (x + y);
          }
          if constexpr (std::is_same_v<T, ParetoPrior>) return p.scale * std::pow(u, -1.0 / p.shape);
        },
        kind_);
  }

 private:
  void validate() const {
    std::visit(
        [](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, NormalPrior>) {
            if (!std::isfinite(p.mu) || !(p.eta >= 0.0) || !std::isfinite(p.eta)) {
              throw domain_error("normal prior needs finite mu and eta >= 0");
            }
          }
          if constexpr (std::is_same_v<T, UniformPrior>) {
            if (!std::isfinite(p.lo) || !std::isfinite(p.hi) || !(p.lo < p.hi)) {
              throw domain_error("uniform prior needs finite lo < hi");
            }
          }
          if constexpr (std::is_same_v<T, BetaPrior>) {
            if (!(p.shape_a > 0.0) || !(p.shape_b > 0.0) || !std::isfinite(p.shape_a) ||
                !std::isfinite(p.shape_b)) {
              throw domain_error("beta prior needs positive finite shapes");
            }
          }
          if constexpr (std::is_same_v<T, ParetoPrior>) {
            if (!(p.scale > 0.0) || !(p.shape > 0.0) || !std::isfinite(p.scale) ||
                !std::isfinite(p.shape)) {
              throw domain_error("pareto prior needs positive finite scale and shape");
            }
          }
        },
        kind_);
  }

  Kind kind_;
};

// E[W | W_hat = w_hat] for W ~ prior and W_hat = W - beta + sigma * eps,
// by adaptive quadrature of
//   int (w - c) f(w) L(w) dw / int f(w) L(w) dw,   c = w_hat + beta,
// where L is the Gaussian likelihood rescaled so that its peak over the
// support is 1. The integration range is the support cut to the region where
// L exceeds exp(-50), i.e. within ten noise standard deviations of the
// likelihood's best point on the support.
[[nodiscard]] inline double posterior_mean_numeric(double w_hat, const QualityPrior& prior,
                                                   double sigma, double beta,
                                                   const numeric::QuadratureOptions& opt = {
                                                       1e-10, 0.0, 4000}) {
  if (!std::isfinite(w_hat) || !std::isfinite(beta) || !std::isfinite(sigma) || sigma < 0.0) {
    throw domain_error("posterior_mean_numeric: w_hat, beta must be finite and sigma >= 0");
  }
  const double c = w_hat + beta;
  if (sigma == 0.0) return c;

  auto [lo, hi] = prior.support();
  if (prior.is_normal()) {
    const auto& n = std::get<NormalPrior>(prior.kind());
    if (n.eta == 0.0) return n.mu;
    lo = n.mu - 12.0 * n.eta;
    hi = n.mu + 12.0 * n.eta;
  }
  const double nearest = std::clamp(c, lo, hi);
  const double d_min = std::abs(c - nearest);
  const double reach = std::sqrt(d_min * d_min + 100.0 * sigma * sigma);
  const double a = std::max(lo, c - reach);
  const double b = std::min(hi, c + reach);
  if (!(b > a)) throw numeric_error("posterior_mean_numeric: empty integration range");

  std::vector<double> points{a, b, c, c - sigma, c + sigma, c - 3.0 * sigma, c + 3.0 * sigma};
  const double m = prior.mean();
  const double s = prior.sd();
  if (std::isfinite(m)) points.push_back(m);
  if (std::isfinite(m) && std::isfinite(s)) {
    points.push_back(m - s);
    points.push_back(m + s);
  }
  std::erase_if(points, [&](double x) { return !(x >= a && x <= b); });
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  const double two_var = 2.0 * sigma * sigma;
  auto integrand = [&](double w) {
    const double d = w - c;
    const double lik = std::exp(-(d * d - d_min * d_min) / two_var);
    const double f = prior.pdf(w) * lik;
    return std::array<double, 2>{d * f, f};
  };
  const auto r = numeric::integrate<2>(integrand, points, opt);
  if (!(r.value[1] > 0.0) || !std::isfinite(r.value[1])) {
    throw numeric_error("posterior_mean_numeric: zero likelihood mass; w_hat is incompatible "
                        "with the prior");
  }
  return c + r.value[0] / r.value[1];
}

}  // namespace fairsel

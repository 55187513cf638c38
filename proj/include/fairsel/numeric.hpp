#pragma once

// Small numerical kernels: bracketed bisection for monotone functions and
// globally adaptive 7/15-point Gauss-Kronrod quadrature.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "fairsel/errors.hpp"

namespace fairsel::numeric {

struct RootTolerance {
  double x_tol = 0.0;           // stop once the bracket is this narrow
  double residual_tol = 0.0;    // or once |f(x) - target| is this small
  int max_iterations = 400;
};

// Finds x in [lo, hi] with f(x) = target for a non-increasing f, given
// f(lo) >= target >= f(hi).
template <class F>
[[nodiscard]] double bisect_decreasing(F&& f, double target, double lo, double hi,
                                       const RootTolerance& tol = {}) {
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < tol.max_iterations; ++it) {
    mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return mid;
    const double r = f(mid) - target;
    if (!std::isfinite(r)) throw numeric_error("bisection: non-finite function value");
    if (std::abs(r) <= tol.residual_tol || hi - lo <= tol.x_tol) return mid;
    if (r > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return mid;
}

namespace detail {

inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t N>
struct Panel {
  double a;
  double b;
  std::array<double, N> value;
  double error;
  friend bool operator<(const Panel& l, const Panel& r) { return l.error < r.error; }
};

template <std::size_t N, class F>
Panel<N> gk15(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<double, N> kronrod{};
  std::array<double, N> gauss{};
  const auto fc = f(centre);
  for (std::size_t k = 0; k < N; ++k) {
    kronrod[k] = kronrod_weights[7] * fc[k];
    gauss[k] = gauss_weights[3] * fc[k];
  }
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kronrod_nodes[j];
    const auto f1 = f(centre - dx);
    const auto f2 = f(centre + dx);
    for (std::size_t k = 0; k < N; ++k) {
      const double s = f1[k] + f2[k];
      kronrod[k] += kronrod_weights[j] * s;
      if (j % 2 == 1) gauss[k] += gauss_weights[j / 2] * s;
    }
  }
  Panel<N> p{a, b, {}, 0.0};
  for (std::size_t k = 0; k < N; ++k) {
    p.value[k] = kronrod[k] * half;
    p.error = std::max(p.error, std::abs((kronrod[k] - gauss[k]) * half));
  }
  return p;
}

}  // namespace detail

template <std::size_t N>
struct QuadratureResult {
  std::array<double, N> value{};
  double error = 0.0;
  std::size_t panels = 0;
  bool converged = false;
};

struct QuadratureOptions {
  double rel_tol = 1e-12;
  double abs_tol = 0.0;
  std::size_t max_panels = 4000;
};

// Integrates a vector-valued f (returning std::array<double, N>) over the
// sorted breakpoints, bisecting the panel with the largest error estimate
// until the summed error meets abs_tol + rel_tol * max_k |I_k|.
template <std::size_t N, class F>
[[nodiscard]] QuadratureResult<N> integrate(F&& f, std::span<const double> breakpoints,
                                            const QuadratureOptions& opt = {}) {
  QuadratureResult<N> out;
  if (breakpoints.size() < 2) return out;
  std::priority_queue<detail::Panel<N>> queue;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i + 1] > breakpoints[i])) continue;
    queue.push(detail::gk15<N>(f, breakpoints[i], breakpoints[i + 1]));
  }
  auto totals = [&]() {
    std::array<double, N> value{};
    double error = 0.0;
    auto copy = queue;
    while (!copy.empty()) {
      for (std::size_t k = 0; k < N; ++k) value[k] += copy.top().value[k];
      error += copy.top().error;
      copy.pop();
    }
    return std::pair{value, error};
  };
  // Running sums avoid re-walking the queue on every split.
  std::array<double, N> value{};
  double error = 0.0;
  {
    auto [v, e] = totals();
    value = v;
    error = e;
  }
  while (!queue.empty()) {
    double scale = 0.0;
    for (double v : value) scale = std::max(scale, std::abs(v));
    if (error <= opt.abs_tol + opt.rel_tol * scale) {
      out.converged = true;
      break;
    }
    if (queue.size() >= opt.max_panels) break;
    const auto worst = queue.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    queue.pop();
    auto left = detail::gk15<N>(f, worst.a, mid);
    auto right = detail::gk15<N>(f, mid, worst.b);
    for (std::size_t k = 0; k < N; ++k) value[k] += left.value[k] + right.value[k] - worst.value[k];
    error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
  }
  // Re-sum from scratch so cancellation in the running totals does not leak out.
  auto [v, e] = totals();
  out.value = v;
  out.error = e;
  out.panels = queue.size();
  if (!out.converged) {
    double scale = 0.0;
    for (double x : v) scale = std::max(scale, std::abs(x));
    out.converged = e <= opt.abs_tol + opt.rel_tol * scale;
  }
  return out;
}

template <class F>
[[nodiscard]] double integrate_scalar(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  const std::array<double, 2> bp{a, b};
  auto wrapped = [&](double x) { return std::array<double, 1>{f(x)}; };
  return integrate<1>(wrapped, bp, opt).value[0];
}

}  // namespace fairsel::numeric

#pragma once

// Helpers shared by the nested OC kernels.

#include "amdsp/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace amdsp::detail {

/// Truncation of standard normal integration variables; the mass beyond is
/// below 1e-16.
inline constexpr double kNormalCut = 8.3;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty() const noexcept { return !(hi > lo); }
};

/// {x in [lo, hi] : margin(x) >= 0} for a concave margin. Empty when the
/// maximum is negative.
template <class Margin>
Interval concave_support(const Margin& margin, double lo, double hi) {
  if (!(hi > lo)) return {};
  const double tol = 1e-10 * std::max(1.0, hi - lo);
  const double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = margin(c), fd = margin(d);
  while (b - a > tol) {
    if (fc >= 0.0 || fd >= 0.0) break;
    if (fc > fd) {
      b = d; d = c; fd = fc;
      c = b - inv_phi * (b - a);
      fc = margin(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + inv_phi * (b - a);
      fd = margin(d);
    }
  }
  double inside;
  if (fc >= 0.0) inside = c;
  else if (fd >= 0.0) inside = d;
  else return {};

  Interval out{lo, hi};
  auto fn = [&](double x) { return margin(x); };
  if (margin(lo) < 0.0) out.lo = bracketed_root(fn, lo, inside);
  if (margin(hi) < 0.0) out.hi = bracketed_root(fn, inside, hi);
  return out;
}

/// Smoothstep map t in [0,1] -> [a,b] with zero derivative at both ends;
/// turns sqrt-type endpoint behaviour into a smooth integrand.
struct SmoothStep {
  double a, span;
  double x(double t) const noexcept { return a + span * t * t * (3.0 - 2.0 * t); }
  double jacobian(double t) const noexcept { return span * 6.0 * t * (1.0 - t); }
};

/// Map t in [0,1] -> [a,b] clustering nodes quadratically at b.
struct ClusterRight {
  double a, b;
  double x(double t) const noexcept {
    const double d = 1.0 - t;
    return b - (b - a) * d * d;
  }
  double jacobian(double t) const noexcept { return 2.0 * (b - a) * (1.0 - t); }
};

/// Chi density of v = sqrt(W), W ~ chi-square(r): 2 v g_r(v^2).
double chi_density(double v, int r);

/// chi_density with the normalizer hoisted out of inner loops.
struct ChiLaw {
  int r;
  double log_norm;
  explicit ChiLaw(int dof)
      : r(dof), log_norm(std::log(2.0) - 0.5 * dof * std::log(2.0) - std::lgamma(0.5 * dof)) {}
  double density(double v) const noexcept {
    if (v <= 0.0) return 0.0;
    return std::exp(log_norm + (r - 1) * std::log(v) - 0.5 * v * v);
  }
};

}  // namespace amdsp::detail

#include "amdsp/isoline.hpp"

#include "amdsp/special_functions.hpp"

#include <cmath>
#include <string>

namespace amdsp {

namespace {

void require_fraction(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("fraction defective must lie in (0, 1)");
}

// Degenerate intervals are returned as the midpoint once sigma is this close
// to sigma0 (relative); the half width scales like sqrt(sigma0 - sigma).
constexpr double kDegenerateRel = 1e-12;

}  // namespace

SpecLimits::SpecLimits(double l, double u) : lower(l), upper(u) {
  if (!(std::isfinite(l) && std::isfinite(u) && l < u)) {
    throw std::invalid_argument("specification limits require lower < upper");
  }
}

ProcessPoint::ProcessPoint(double m, double s) : mu(m), sigma(s) {
  if (!std::isfinite(m) || !(s > 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument("process point requires finite mu and sigma > 0");
  }
}

double fraction_defective(const ProcessPoint& pt, const SpecLimits& lim) {
  return normal_cdf((lim.lower - pt.mu) / pt.sigma) + normal_cdf((pt.mu - lim.upper) / pt.sigma);
}

double sigma0(double p, const SpecLimits& lim) {
  require_fraction(p);
  return (lim.lower - lim.upper) / (2.0 * normal_quantile(0.5 * p));
}

double mu_upper(double sigma, double p, const SpecLimits& lim) {
  require_fraction(p);
  if (!(sigma > 0.0)) throw std::invalid_argument("mu_upper: sigma must be positive");
  const double s0 = sigma0(p, lim);
  if (sigma > s0 * (1.0 + 1e-14)) {
    throw EmptyAcceptanceInterval("acceptance interval is empty: sigma > sigma0(p)");
  }
  const double mid = lim.midpoint();
  if (s0 - sigma < kDegenerateRel * s0) return mid;
  const double right = lim.upper + sigma * normal_quantile(p);
  if (right <= mid) return mid;
  // g is increasing on [mid, right]; g(mid) <= 0 <= g(right).
  auto g = [&](double mu) { return fraction_defective(ProcessPoint{mu, sigma}, lim) - p; };
  if (g(right) <= 0.0) return right;
  return bracketed_root(g, mid, right);
}

double mu_lower(double sigma, double p, const SpecLimits& lim) {
  return lim.reflect(mu_upper(sigma, p, lim));
}

double sigma_on_isoline(double offset, double p, const SpecLimits& lim) {
  require_fraction(p);
  offset = std::abs(offset);
  const double a = lim.half_width();
  if (offset >= a) return 0.0;
  const double s0 = sigma0(p, lim);
  if (offset == 0.0) return s0;
  const double mu = lim.midpoint() + offset;
  // p(mu, .) is increasing in sigma; the lower tail never exceeds the upper
  // one for mu >= midpoint, which gives the bracket below.
  const double lo = (a - offset) / -normal_quantile(0.5 * p);
  const double hi = std::min(s0, (a - offset) / -normal_quantile(p));
  auto g = [&](double s) { return fraction_defective(ProcessPoint{mu, s}, lim) - p; };
  if (hi <= lo) return lo;
  if (g(hi) <= 0.0) return hi;
  if (g(lo) >= 0.0) return lo;
  return bracketed_root(g, lo, hi);
}

IsolineTable::IsolineTable(double p, const SpecLimits& lim, double abs_tol)
    : p_(p), sigma0_(amdsp::sigma0(p, lim)) {
  const double mid = lim.midpoint();
  const double umax = std::sqrt(sigma0_);
  auto f = [&](double u) {
    const double s = sigma0_ - u * u;
    if (s <= 0.0) return lim.half_width();
    return mu_upper(s, p, lim) - mid;
  };
  table_ = ChebyshevTable(f, 0.0, umax, abs_tol);
}

double IsolineTable::half_interval(double s) const {
  if (s > sigma0_) return -1.0;
  return table_(std::sqrt(sigma0_ - std::max(s, 0.0)));
}

SigmaBoundTable::SigmaBoundTable(double p, const SpecLimits& lim, double abs_tol)
    : p_(p), sigma0_(amdsp::sigma0(p, lim)), half_width_(lim.half_width()) {
  tail_slope_ = 1.0 / -normal_quantile(p);
  auto f = [&](double x) { return sigma_on_isoline(std::sqrt(std::max(x, 0.0)), p, lim); };
  table_ = ChebyshevTable(f, 0.0, half_width_ * half_width_, abs_tol);
}

double SigmaBoundTable::operator()(double offset) const {
  offset = std::abs(offset);
  if (offset >= half_width_) return -(offset - half_width_) * tail_slope_;
  return table_(offset * offset);
}

}  // namespace amdsp

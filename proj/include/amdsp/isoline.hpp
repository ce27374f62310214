#pragma once

#include "amdsp/quadrature.hpp"

#include <stdexcept>

namespace amdsp {

/// Two-sided specification limits, lower < upper.
struct SpecLimits {
  double lower = 0.0;
  double upper = 0.0;

  SpecLimits() = default;
  SpecLimits(double l, double u);

  double midpoint() const noexcept { return 0.5 * (lower + upper); }
  double half_width() const noexcept { return 0.5 * (upper - lower); }
  /// Mirror image mu -> L + U - mu.
  double reflect(double mu) const noexcept { return lower + upper - mu; }

  friend bool operator==(const SpecLimits&, const SpecLimits&) = default;
};

/// A (mu, sigma) hypothesis about the production process.
struct ProcessPoint {
  double mu = 0.0;
  double sigma = 1.0;

  ProcessPoint() = default;
  ProcessPoint(double m, double s);
};

/// sigma exceeds sigma0(p): no mean reaches fraction defective <= p.
class EmptyAcceptanceInterval : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Phi((L - mu)/sigma) + Phi((mu - U)/sigma).
double fraction_defective(const ProcessPoint& pt, const SpecLimits& lim);

/// Largest sigma at which some mean attains fraction defective <= p.
double sigma0(double p, const SpecLimits& lim);

/// Right/left end of the acceptance interval {mu : p(mu, sigma) <= p}.
/// Throws EmptyAcceptanceInterval when sigma > sigma0(p).
double mu_upper(double sigma, double p, const SpecLimits& lim);
double mu_lower(double sigma, double p, const SpecLimits& lim);

/// Inverse of mu_upper in sigma: the sigma at which the mean
/// midpoint + offset has fraction defective exactly p. Zero once the offset
/// reaches the half width.
double sigma_on_isoline(double offset, double p, const SpecLimits& lim);

/// Memoized s -> mu_upper(s, p) - midpoint on (0, sigma0(p)], interpolated
/// in u = sqrt(sigma0 - s) where the half width behaves like u.
class IsolineTable {
 public:
  IsolineTable() = default;
  IsolineTable(double p, const SpecLimits& lim, double abs_tol = 1e-11);

  double p() const noexcept { return p_; }
  double sigma0() const noexcept { return sigma0_; }
  /// Half width of the acceptance interval at s; negative when s > sigma0.
  double half_interval(double s) const;

 private:
  double p_ = 0.0;
  double sigma0_ = 0.0;
  ChebyshevTable table_;
};

/// Memoized offset -> sigma_on_isoline(offset, p), tabulated in offset^2.
/// Beyond the half width it continues linearly with slope -1/|Phi^{-1}(p)| so
/// the extension stays concave.
class SigmaBoundTable {
 public:
  SigmaBoundTable() = default;
  SigmaBoundTable(double p, const SpecLimits& lim, double abs_tol = 1e-11);

  double p() const noexcept { return p_; }
  double sigma0() const noexcept { return sigma0_; }
  double operator()(double offset) const;

 private:
  double p_ = 0.0;
  double sigma0_ = 0.0;
  double half_width_ = 0.0;
  double tail_slope_ = 0.0;
  ChebyshevTable table_;
};

}  // namespace amdsp

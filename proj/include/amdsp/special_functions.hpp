#pragma once

// Standard normal and chi-square primitives used by every OC integral.

namespace amdsp {

/// Standard normal density.
double normal_pdf(double x);

/// Standard normal distribution function Phi(x). Throws std::domain_error for
/// non-finite x.
double normal_cdf(double x);

/// Upper tail 1 - Phi(x) without cancellation.
double normal_ccdf(double x);

/// P(a <= Z <= b) for standard normal Z, evaluated on the tail that avoids
/// cancellation. Returns 0 when b <= a.
double normal_interval(double a, double b);

/// Inverse of Phi on (0, 1): Wichura's AS 241 rational approximation followed
/// by two Newton steps. Throws std::domain_error outside the open interval.
double normal_quantile(double p);

/// Chi-square density g_r(t) evaluated in log space. t must be >= 0, r >= 1.
double chi2_pdf(double t, int r);
double chi2_log_pdf(double t, int r);

/// Chi-square distribution function and its complement.
double chi2_cdf(double t, int r);
double chi2_ccdf(double t, int r);

/// Lower/upper tail quantiles: chi2_cdf(chi2_quantile(q, r), r) == q.
double chi2_quantile(double q, int r);
double chi2_upper_quantile(double q, int r);

}  // namespace amdsp

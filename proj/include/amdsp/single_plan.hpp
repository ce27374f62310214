#pragma once

#include "amdsp/band.hpp"
#include "amdsp/isoline.hpp"
#include "amdsp/quadrature.hpp"

#include <stdexcept>

namespace amdsp {

/// Single sampling plan: accept the lot when p(Xbar, S) <= k.
struct SinglePlan {
  int n = 0;
  double k = 0.0;

  SinglePlan() = default;
  SinglePlan(int n_, double k_);

  friend bool operator==(const SinglePlan&, const SinglePlan&) = default;
};

/// Two-point OC contract: OC(p1) >= 1 - alpha, OC(p2) <= beta.
struct DesignRequirement {
  double p1 = 0.0;
  double p2 = 0.0;
  double alpha = 0.0;
  double beta = 0.0;

  DesignRequirement() = default;
  DesignRequirement(double p1_, double p2_, double alpha_, double beta_);
};

class InfeasibleRequirement : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// OC of a single plan as the integral over the chi variable sqrt(W), W the
/// scaled sample variance, of the probability that the sample mean falls in
/// the acceptance interval for the realised S. The isoline table for k is
/// built once, so reuse an instance for many process points.
class SinglePlanOC {
 public:
  SinglePlanOC(const SinglePlan& plan, const SpecLimits& lim, double abs_tol = 1e-11);

  IntegralResult evaluate(const ProcessPoint& pt) const;
  double operator()(const ProcessPoint& pt) const { return evaluate(pt).value; }

  /// OC at (mu_upper(sigma, p), sigma).
  double on_isoline(double p, double sigma) const;

  const SinglePlan& plan() const noexcept { return plan_; }
  const SpecLimits& limits() const noexcept { return lim_; }
  const IsolineTable& table() const noexcept { return table_; }

 private:
  SinglePlan plan_;
  SpecLimits lim_;
  double abs_tol_;
  IsolineTable table_;
  double chi_lo_;
  double chi_hi_;
};

double oc_single(const SinglePlan& plan, const ProcessPoint& pt, const SpecLimits& lim);
double oc_single_on_isoline(const SinglePlan& plan, double p, double sigma, const SpecLimits& lim);
BandExtreme band_extreme_single(const SinglePlan& plan, double p, Extremum mode,
                                const SpecLimits& lim);

struct SingleDesign {
  SinglePlan plan;
  double alpha_star = 0.0;  // one-sided level the plan was built for
  double beta_star = 0.0;
  double alpha_eff = 0.0;  // 1 - min over the p1 band
  double beta_eff = 0.0;   // max over the p2 band
};

/// One-sided single plan at levels (alpha*, beta*) translated to the two-sided
/// threshold k = Phi(l / sqrt(n)), l the midpoint of the admissible interval.
/// alpha* starts at alpha and drops in steps of `step` until both two-sided
/// band conditions hold; beta* stays at beta.
SingleDesign design_single(const DesignRequirement& req, const SpecLimits& lim, double step = 0.001);

}  // namespace amdsp

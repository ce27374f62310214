#pragma once

#include "amdsp/band.hpp"
#include "amdsp/isoline.hpp"
#include "amdsp/quadrature.hpp"
#include "amdsp/single_plan.hpp"

#include <string>
#include <utility>

namespace amdsp {

/// Two-stage plan on the essentially-ML estimator:
///   stage 1 (n1): accept if p1* <= k1, reject if p1* > k2, else continue;
///   stage 2 (n2): accept iff the pooled estimator pp* <= k3.
struct DoublePlan {
  int n1 = 0;
  double k1 = 0.0;
  double k2 = 0.0;
  int n2 = 0;
  double k3 = 0.0;

  DoublePlan() = default;
  DoublePlan(int n1_, double k1_, double k2_, int n2_, double k3_);

  friend bool operator==(const DoublePlan&, const DoublePlan&) = default;
};

/// exact: the joint probability of the second-stage events, integrating the
///   pooled variance in closed form (agrees with simulation).
/// printed: the published integrand, in which the y2 entering the pooled
///   standard deviation is integrated separately from the y2 entering the
///   pooled mean; reproduces the published tables but not the simulated OC.
enum class OcFormula { exact, printed };

struct QuadratureConfig {
  int nodes_per_dim = 32;
  double abs_tol = 1e-6;
  double mu_table_accuracy = 1e-9;
  /// Also evaluate with nodes_per_dim + 8, report the difference and throw
  /// NumericalFailure when it exceeds abs_tol.
  bool estimate_error = false;
  OcFormula formula = OcFormula::exact;
};

const char* to_string(OcFormula f) noexcept;
OcFormula parse_oc_formula(const std::string& name);

/// Integration variables of the second-stage acceptance probability and the
/// bounds derived from them. first_threshold is k2 for P(A2u), k1 for P(A2l).
struct A2Frame {
  double w1 = 0.0, y1 = 0.0, y2 = 0.0, w2 = 0.0;
  double S = 0.0;         // pooled standard deviation
  double C1 = 0.0, C2 = 0.0;  // bounds on y2 from pp* <= k3 (valid when S < sigma0(k3))
  double D = 0.0;         // bound on w2 from S < sigma0(k3)
  double E1 = 0.0, E2 = 0.0;  // bounds on y1 from p1* <= first_threshold
  double F = 0.0;         // bound on w1
};

A2Frame make_a2_frame(const DoublePlan& plan, double first_threshold, const ProcessPoint& pt,
                      const SpecLimits& lim, double w1, double y1, double y2, double w2);

/// S = sigma sqrt((n1+n2)(w1+w2) + (sqrt(n2) y1 - sqrt(n1) y2)^2) / sqrt((n1+n2-1)(n1+n2)).
double pooled_sd(double w1, double y1, double y2, double w2, int n1, int n2, double sigma);

/// OC and ASN of one double plan. Builds the isoline tables once; instances are
/// immutable and may be shared across threads.
class DoublePlanEvaluator {
 public:
  DoublePlanEvaluator(const DoublePlan& plan, const SpecLimits& lim, const QuadratureConfig& cfg = {});

  /// P(pp* <= k3, p1* <= k2) and P(pp* <= k3, p1* <= k1).
  IntegralResult prob_A2_upper(const ProcessPoint& pt) const;
  IntegralResult prob_A2_lower(const ProcessPoint& pt) const;

  /// L(n1,k1) + P(A2u) - P(A2l).
  IntegralResult oc(const ProcessPoint& pt) const;
  /// n1 + n2 (L(n1,k2) - L(n1,k1)).
  double asn(const ProcessPoint& pt) const;

  double oc_on_isoline(double p, double sigma) const;
  double asn_on_isoline(double p, double sigma) const;

  /// Serial evaluation with direct root solves instead of memo tables.
  IntegralResult prob_joint_reference(double first_threshold, const ProcessPoint& pt) const;

  const DoublePlan& plan() const noexcept { return plan_; }
  const SpecLimits& limits() const noexcept { return lim_; }
  const QuadratureConfig& config() const noexcept { return cfg_; }

 private:
  double joint(const IsolineTable& first, const ProcessPoint& pt, int nodes) const;
  IntegralResult joint_with_error(const IsolineTable& first, const ProcessPoint& pt) const;

  DoublePlan plan_;
  SpecLimits lim_;
  QuadratureConfig cfg_;
  SinglePlanOC first_k1_;
  SinglePlanOC first_k2_;
  SigmaBoundTable pooled_;
  IsolineTable pooled_half_;
};

IntegralResult prob_A2_upper(const DoublePlan& plan, const ProcessPoint& pt, const SpecLimits& lim,
                             const QuadratureConfig& cfg = {});
IntegralResult prob_A2_lower(const DoublePlan& plan, const ProcessPoint& pt, const SpecLimits& lim,
                             const QuadratureConfig& cfg = {});
IntegralResult oc_double(const DoublePlan& plan, const ProcessPoint& pt, const SpecLimits& lim,
                         const QuadratureConfig& cfg = {});
double asn_double(const DoublePlan& plan, const ProcessPoint& pt, const SpecLimits& lim);

struct AsnMaximum {
  ProcessPoint point;
  double fraction_defective = 0.0;
  double value = 0.0;
};

/// Global maximum of the ASN over the (mu, sigma) half plane mu >= midpoint,
/// searched iso-p-line by iso-p-line.
AsnMaximum asn_max(const DoublePlan& plan, const SpecLimits& lim);

BandExtreme band_extreme_double(const DoublePlan& plan, double p, Extremum mode,
                                const SpecLimits& lim, const QuadratureConfig& cfg = {});
BandExtreme band_extreme_double(const DoublePlanEvaluator& eval, double p, Extremum mode);

}  // namespace amdsp

#pragma once

#include "amdsp/double_plan.hpp"
#include "amdsp/single_plan.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace amdsp {

/// Plans for an upper limit U only: accept when sqrt(n) (Xbar - U) / S <= l,
/// i.e. Phi((Xbar - U) / S) <= Phi(l / sqrt(n)).
struct OneSidedDoublePlan {
  int n1 = 0;
  double l1 = 0.0;
  double l2 = 0.0;
  int n2 = 0;
  double l3 = 0.0;

  OneSidedDoublePlan() = default;
  OneSidedDoublePlan(int n1_, double l1_, double l2_, int n2_, double l3_);

  friend bool operator==(const OneSidedDoublePlan&, const OneSidedDoublePlan&) = default;
};

/// P(sqrt(n) (Xbar - U) / S <= l) at fraction defective p = P(X > U): a
/// noncentral t probability with noncentrality sqrt(n) Phi^-1(p).
double oc_one_sided_single(int n, double l, double p);

/// OC of the pooled one-sided double plan; `nodes` Gauss-Legendre points per
/// dimension of the (chi, y1, y2) integral.
double oc_one_sided_double(const OneSidedDoublePlan& plan, double p, int nodes = 32);

/// n1 + n2 (L(n1, l2; p) - L(n1, l1; p)).
double asn_one_sided(const OneSidedDoublePlan& plan, double p);

struct OneSidedAsnMax {
  double p = 0.0;
  double value = 0.0;
};
OneSidedAsnMax n_max_one_sided(const OneSidedDoublePlan& plan);

DoublePlan translate_to_two_sided(const OneSidedDoublePlan& plan);
OneSidedDoublePlan translate_to_one_sided(const DoublePlan& plan);

struct OneSidedDesign {
  OneSidedDoublePlan plan;
  double n_max = 0.0;
  double oc_p1 = 0.0;
  double oc_p2 = 0.0;
  double gap = 0.0;  // l_beta(n1) - l1, where L(n1, l_beta; p2) = beta
};

struct OneSidedSearchOptions {
  int nodes = 32;
  /// Starting sample sizes; 0 picks them from the single-plan size.
  int n1_start = 0;
  int n2_start = 0;
  /// Tolerance on l1 when minimising N_max within one (n1, n2).
  double l1_tol = 1e-4;
  /// Starting guess for l_beta(n1) - l1.
  double gap_start = 1.0;
  int max_moves = 60;
};

/// Smallest sample size (and the midpoint threshold) of a one-sided single
/// plan meeting L(p1) >= 1 - alpha and L(p2) <= beta.
struct OneSidedSingleDesign {
  int n = 0;
  double l = 0.0;
  double l_alpha = 0.0;  // L(p1) = 1 - alpha
  double l_beta = 0.0;   // L(p2) = beta
};
OneSidedSingleDesign design_one_sided_single(const DesignRequirement& req);

/// Minimal-N_max plan among those with L(p1) = 1 - alpha and L(p2) = beta:
/// a local search over (n1, n2); for each pair l1 is optimised and (l2, l3)
/// solve the two equality constraints.
OneSidedDesign design_one_sided_am(const DesignRequirement& req, const OneSidedSearchOptions& opt = {});

/// Best plan for fixed sample sizes; throws InfeasibleRequirement when no l1
/// admits a solution.
OneSidedDesign best_one_sided_for_sizes(const DesignRequirement& req, int n1, int n2, int nodes = 32,
                                        double l1_tol = 1e-4, double gap_guess = 1.0);

struct TighteningRow {
  double alpha_star2 = 0.0;
  double beta_star2 = 0.0;
  OneSidedDoublePlan one_sided;
  DoublePlan candidate;
  double n_max = 0.0;  // of the one-sided plan
  BandExtreme min_oc_p1;
  BandExtreme max_oc_p2;
  bool passes = false;
};

using TighteningTrace = std::vector<TighteningRow>;

struct TwoSidedDesignOptions {
  /// Formula used for the band checks; printed reproduces the published
  /// stopping point.
  QuadratureConfig band_quadrature{32, 1e-6, 1e-9, false, OcFormula::printed};
  OneSidedSearchOptions search;
  double step = 0.001;
  /// Starting alpha**; 0 takes alpha* of the single-plan design.
  double alpha_start = 0.0;
  int max_iterations = 200;
  std::function<void(const TighteningRow&)> on_row;
};

struct TwoSidedDesign {
  DoublePlan plan;
  TighteningTrace trace;
  SingleDesign single;
};

/// Raised when alpha** runs out before the band conditions hold.
class TighteningExhausted : public InfeasibleRequirement {
 public:
  TighteningExhausted(const std::string& what, TighteningTrace trace)
      : InfeasibleRequirement(what), trace_(std::move(trace)) {}
  const TighteningTrace& trace() const noexcept { return trace_; }

 private:
  TighteningTrace trace_;
};

/// One-sided AM plans at (alpha**, beta) translated to two-sided candidates;
/// alpha** drops by `step` until min OC over the p1 band >= 1 - alpha and max
/// OC over the p2 band <= beta.
TwoSidedDesign design_two_sided_am(const DesignRequirement& req, const SpecLimits& lim,
                                   const TwoSidedDesignOptions& opt = {});

}  // namespace amdsp

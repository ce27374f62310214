#include "amdsp/single_plan.hpp"

#include "amdsp/one_sided.hpp"
#include "amdsp/special_functions.hpp"

#include <algorithm>
#include <cmath>

namespace amdsp {

namespace {

// Chi-variable integration range; mass outside is below 2e-16.
constexpr double kChiTail = 1e-16;

}  // namespace

SinglePlan::SinglePlan(int n_, double k_) : n(n_), k(k_) {
  if (n_ < 2) throw std::invalid_argument("single plan requires n >= 2");
  if (!(k_ > 0.0 && k_ < 1.0)) throw std::invalid_argument("single plan requires 0 < k < 1");
}

DesignRequirement::DesignRequirement(double p1_, double p2_, double alpha_, double beta_)
    : p1(p1_), p2(p2_), alpha(alpha_), beta(beta_) {
  if (!(p1_ > 0.0 && p2_ < 1.0 && alpha_ > 0.0 && alpha_ < 1.0 && beta_ > 0.0 && beta_ < 1.0)) {
    throw std::invalid_argument("requirement values must lie in (0, 1)");
  }
  if (!(p1_ < p2_)) throw InfeasibleRequirement("requirement needs p1 < p2");
  if (!(1.0 - alpha_ > beta_)) throw InfeasibleRequirement("requirement needs 1 - alpha > beta");
}

SinglePlanOC::SinglePlanOC(const SinglePlan& plan, const SpecLimits& lim, double abs_tol)
    : plan_(plan), lim_(lim), abs_tol_(abs_tol), table_(plan.k, lim) {
  const int r = plan.n - 1;
  chi_lo_ = std::sqrt(chi2_quantile(kChiTail, r));
  chi_hi_ = std::sqrt(chi2_upper_quantile(kChiTail, r));
}

IntegralResult SinglePlanOC::evaluate(const ProcessPoint& pt) const {
  const int r = plan_.n - 1;
  const double sqrt_r = std::sqrt(static_cast<double>(r));
  const double sqrt_n = std::sqrt(static_cast<double>(plan_.n));
  const double v_bound = sqrt_r * table_.sigma0() / pt.sigma;
  if (v_bound <= chi_lo_) return {};
  const double mid = lim_.midpoint();

  auto inner = [&](double v) {
    const double hw = table_.half_interval(pt.sigma * v / sqrt_r);
    if (hw < 0.0) return 0.0;
    const double a = sqrt_n * (mid - hw - pt.mu) / pt.sigma;
    const double b = sqrt_n * (mid + hw - pt.mu) / pt.sigma;
    const double chi_density = 2.0 * v * std::exp(chi2_log_pdf(v * v, r));
    return normal_interval(a, b) * chi_density;
  };

  if (v_bound >= chi_hi_) return integrate_adaptive(inner, chi_lo_, chi_hi_, abs_tol_);
  // the interval width vanishes like sqrt(v_bound - v): square the distance
  const double span = v_bound - chi_lo_;
  auto mapped = [&](double x) {
    const double d = 1.0 - x;
    return inner(v_bound - span * d * d) * 2.0 * span * d;
  };
  return integrate_adaptive(mapped, 0.0, 1.0, abs_tol_);
}

double SinglePlanOC::on_isoline(double p, double sigma) const {
  return (*this)(ProcessPoint{mu_upper(sigma, p, lim_), sigma});
}

double oc_single(const SinglePlan& plan, const ProcessPoint& pt, const SpecLimits& lim) {
  return SinglePlanOC(plan, lim)(pt);
}

double oc_single_on_isoline(const SinglePlan& plan, double p, double sigma, const SpecLimits& lim) {
  return SinglePlanOC(plan, lim).on_isoline(p, sigma);
}

BandExtreme band_extreme_single(const SinglePlan& plan, double p, Extremum mode,
                                const SpecLimits& lim) {
  const SinglePlanOC oc(plan, lim);
  return extremize_band([&](double s) { return oc.on_isoline(p, s); }, sigma0(p, lim), mode);
}

SingleDesign design_single(const DesignRequirement& req, const SpecLimits& lim, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("design_single: step must be positive");
  double a_star = req.alpha;
  const double b_star = req.beta;
  constexpr int kMaxSteps = 1000;
  for (int i = 0; i < kMaxSteps; ++i) {
    const OneSidedSingleDesign one = design_one_sided_single(DesignRequirement(req.p1, req.p2, a_star, b_star));
    const SinglePlan plan(one.n, normal_cdf(one.l / std::sqrt(double(one.n))));
    const SingleDesign d{plan, a_star, b_star,
                         1.0 - band_extreme_single(plan, req.p1, Extremum::min, lim).value,
                         band_extreme_single(plan, req.p2, Extremum::max, lim).value};
    const bool beta_ok = d.beta_eff <= req.beta;
    const bool alpha_ok = d.alpha_eff <= req.alpha;
    if (alpha_ok && beta_ok) return d;
    // beta* stays pinned: a larger n from a smaller alpha* also lowers the
    // p2 band
    a_star -= step;
    if (a_star <= 0.0) break;
  }
  throw InfeasibleRequirement("single-plan tightening did not reach the two-sided levels");
}

}  // namespace amdsp

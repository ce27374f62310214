#include "amdsp/double_plan.hpp"

#include "amdsp/detail/support.hpp"
#include "amdsp/special_functions.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace amdsp {

namespace detail {

double chi_density(double v, int r) {
  if (v <= 0.0) return 0.0;
  return 2.0 * v * std::exp(chi2_log_pdf(v * v, r));
}

}  // namespace detail

namespace {

using detail::ClusterRight;
using detail::Interval;
using detail::SmoothStep;
using detail::kNormalCut;

constexpr double kChiTail = 1e-16;
constexpr int kClusterBelowDof = 2;





// Isoline bounds backed by the memo tables.
struct TableBounds {
  const IsolineTable& first;
  const SigmaBoundTable& pooled;
  const IsolineTable& pooled_half_table;
  double first_sigma0() const { return first.sigma0(); }
  double pooled_sigma0() const { return pooled.sigma0(); }
  double first_half(double s) const { return first.half_interval(s); }
  double pooled_sigma(double offset) const { return pooled(offset); }
  double pooled_half(double s) const { return pooled_half_table.half_interval(s); }
};

// Same bounds from direct root solves; the slow reference path.
struct DirectBounds {
  double first_k;
  double k3;
  SpecLimits lim;
  double first_sigma0_;
  double pooled_sigma0_;
  double tail_slope;
  double first_sigma0() const { return first_sigma0_; }
  double pooled_sigma0() const { return pooled_sigma0_; }
  double first_half(double s) const {
    if (s > first_sigma0_) return -1.0;
    return mu_upper(s, first_k, lim) - lim.midpoint();
  }
  double pooled_sigma(double offset) const {
    offset = std::abs(offset);
    if (offset >= lim.half_width()) return -(offset - lim.half_width()) * tail_slope;
    return sigma_on_isoline(offset, k3, lim);
  }
  double pooled_half(double s) const {
    if (s > pooled_sigma0_) return -1.0;
    return mu_upper(s, k3, lim) - lim.midpoint();
  }
};

struct KernelGeometry {
  int n1, n2, r1, r2, total;
  double sqrt_n1, sqrt_n2, sqrt_total, sqrt_r1, sqrt_dof_pooled;
  double mu, sigma, offset;  // offset = mu - midpoint
  double mid;
  double u_lo, u_hi;  // chi range of sqrt(w2)
};

KernelGeometry make_geometry(const DoublePlan& plan, const ProcessPoint& pt, const SpecLimits& lim) {
  KernelGeometry g{};
  g.n1 = plan.n1;
  g.n2 = plan.n2;
  g.r1 = plan.n1 - 1;
  g.r2 = plan.n2 - 1;
  g.total = plan.n1 + plan.n2;
  g.sqrt_n1 = std::sqrt(double(g.n1));
  g.sqrt_n2 = std::sqrt(double(g.n2));
  g.sqrt_total = std::sqrt(double(g.total));
  g.sqrt_r1 = std::sqrt(double(g.r1));
  g.sqrt_dof_pooled = std::sqrt(double(g.total - 1));
  g.mu = pt.mu;
  g.sigma = pt.sigma;
  g.mid = lim.midpoint();
  g.offset = pt.mu - g.mid;
  g.u_lo = std::sqrt(chi2_quantile(kChiTail, g.r2));
  g.u_hi = std::sqrt(chi2_upper_quantile(kChiTail, g.r2));
  return g;
}

// Integral over y2 (and w2 in closed form) for fixed (w1 = v^2, y1).
template <class Bounds>
double second_stage(const Bounds& b, const KernelGeometry& g, const GaussLegendre& rule, double w1,
                    double y1) {
  // D >= 0  <=>  |V| <= rho
  const double big_r = std::pow(g.sqrt_dof_pooled * b.pooled_sigma0() / g.sigma, 2);
  if (big_r <= w1) return 0.0;
  const double rho = std::sqrt(big_r - w1);
  const double centre = g.sqrt_n2 * y1 / g.sqrt_n1;
  const double reach = g.sqrt_total * rho / g.sqrt_n1;
  const double lo = std::max(centre - reach, -kNormalCut);
  const double hi = std::min(centre + reach, kNormalCut);
  if (!(hi > lo)) return 0.0;

  auto pooled_z = [&](double y2) { return (g.sqrt_n1 * y1 + g.sqrt_n2 * y2) / g.sqrt_total; };
  auto pooled_v = [&](double y2) { return (g.sqrt_n2 * y1 - g.sqrt_n1 * y2) / g.sqrt_total; };
  auto margin = [&](double y2) {
    const double s = b.pooled_sigma(g.offset + g.sigma * pooled_z(y2) / g.sqrt_total);
    const double v = pooled_v(y2);
    return g.sqrt_dof_pooled * s / g.sigma - std::sqrt(w1 + v * v);
  };
  const Interval support = detail::concave_support(margin, lo, hi);
  if (support.empty()) return 0.0;

  // The integrand vanishes like d^(r2/2) at the support ends; clustering only
  // pays off for small r2; otherwise it starves the interior step of the cdf.
  const bool cluster = g.r2 < kClusterBelowDof;
  const SmoothStep map{support.lo, support.hi - support.lo};
  const double width = support.hi - support.lo;
  const auto nodes = rule.nodes();
  const auto weights = rule.weights();
  double sum = 0.0;
  for (int i = 0; i < rule.size(); ++i) {
    const double t = 0.5 * (nodes[i] + 1.0);
    const double y2 = cluster ? map.x(t) : support.lo + width * t;
    const double s = b.pooled_sigma(g.offset + g.sigma * pooled_z(y2) / g.sqrt_total);
    if (s <= 0.0) continue;
    const double v = pooled_v(y2);
    const double w2_max = std::pow(g.sqrt_dof_pooled * s / g.sigma, 2) - w1 - v * v;
    if (w2_max <= 0.0) continue;
    const double jac = cluster ? map.jacobian(t) : width;
    sum += 0.5 * weights[i] * jac * normal_pdf(y2) * chi2_cdf(w2_max, g.r2);
  }
  return sum;
}

// Published integrand for fixed (w1, y1): Phi(C2) - Phi(C1) over y2 and
// w2 in [0, D], with S evaluated at the same y2 but the normal weight of the
// pooled mean taken as if y2 were a separate variable.
template <class Bounds>
double second_stage_printed(const Bounds& b, const KernelGeometry& g, const GaussLegendre& rule,
                            double w1, double y1) {
  const double big_r = std::pow(g.sqrt_dof_pooled * b.pooled_sigma0() / g.sigma, 2);
  if (big_r <= w1) return 0.0;
  const double rho = std::sqrt(big_r - w1);
  const double centre = g.sqrt_n2 * y1 / g.sqrt_n1;
  const double reach = g.sqrt_total * rho / g.sqrt_n1;
  const double lo = std::max(centre - reach, -kNormalCut);
  const double hi = std::min(centre + reach, kNormalCut);
  if (!(hi > lo)) return 0.0;

  const detail::ChiLaw chi2(g.r2);
  const SmoothStep map{lo, hi - lo};
  const auto nodes = rule.nodes();
  const auto weights = rule.weights();
  const double base = g.sigma * g.sqrt_n1 * y1 + g.total * g.mu;
  const double scale = g.sigma * g.sqrt_n2;
  double sum = 0.0;
  for (int i = 0; i < rule.size(); ++i) {
    const double t = 0.5 * (nodes[i] + 1.0);
    const double y2 = map.x(t);
    const double cross = (g.sqrt_n2 * y1 - g.sqrt_n1 * y2) / g.sqrt_total;
    const double d = big_r - cross * cross - w1;
    if (d <= 0.0) continue;
    const double u_top = std::sqrt(d);
    if (u_top <= g.u_lo) continue;
    double inner = 0.0;
    for (int m = 0; m < rule.size(); ++m) {
      const double tu = 0.5 * (nodes[m] + 1.0);
      double u, jac;
      if (u_top < g.u_hi) {
        const ClusterRight cm{g.u_lo, u_top};
        u = cm.x(tu);
        jac = cm.jacobian(tu);
      } else {
        u = g.u_lo + (g.u_hi - g.u_lo) * tu;
        jac = g.u_hi - g.u_lo;
      }
      const double s = pooled_sd(w1, y1, y2, u * u, g.n1, g.n2, g.sigma);
      const double h3 = b.pooled_half(s);
      if (h3 < 0.0) continue;
      const double c1 = (g.total * (g.mid - h3) - base) / scale;
      const double c2 = (g.total * (g.mid + h3) - base) / scale;
      inner += 0.5 * weights[m] * jac * chi2.density(u) * normal_interval(c1, c2);
    }
    sum += 0.5 * weights[i] * map.jacobian(t) * normal_pdf(y2) * inner;
  }
  return sum;
}

// Range of y1 from which the pooled acceptance region can be reached at
// w1. In the rotated pair (z, V) the region sqrt(w1 + V^2) <= A(z) is convex,
// so its y1-projection ends at the extremes of sqrt(n1) z +- sqrt(n2) rho(z).
template <class Bounds>
Interval pooled_window(const Bounds& b, const KernelGeometry& g, double w1) {
  auto amp = [&](double z) {
    return g.sqrt_dof_pooled * b.pooled_sigma(g.offset + g.sigma * z / g.sqrt_total) / g.sigma;
  };
  const double root_w1 = std::sqrt(w1);
  const double reach = 2.0 * kNormalCut;
  const Interval zs =
      detail::concave_support([&](double z) { return amp(z) - root_w1; }, -reach, reach);
  if (zs.empty()) return {};
  auto rho = [&](double z) {
    const double a = amp(z);
    return std::sqrt(std::max(0.0, a * a - w1));
  };
  const double x_tol = 1e-9 * std::max(1.0, zs.hi - zs.lo);
  const auto upper = [&](double z) { return g.sqrt_n1 * z + g.sqrt_n2 * rho(z); };
  const auto lower = [&](double z) { return g.sqrt_n2 * rho(z) - g.sqrt_n1 * z; };
  const double top = golden_section_max(upper, zs.lo, zs.hi, x_tol).value;
  const double bottom = -golden_section_max(lower, zs.lo, zs.hi, x_tol).value;
  const double pad = 1e-9 * (top - bottom);
  return {bottom / g.sqrt_total - pad, top / g.sqrt_total + pad};
}

// Contribution of one chi node v (w1 = v^2) integrated over y1.
template <OcFormula F, class Bounds>
double first_stage_slice(const Bounds& b, const KernelGeometry& g, const GaussLegendre& rule, double v) {
  const double s1 = g.sigma * v / g.sqrt_r1;
  const double hw = b.first_half(s1);
  if (hw < 0.0) return 0.0;
  double e1 = std::max(g.sqrt_n1 * (g.mid - hw - g.mu) / g.sigma, -kNormalCut);
  double e2 = std::min(g.sqrt_n1 * (g.mid + hw - g.mu) / g.sigma, kNormalCut);
  if (!(e2 > e1)) return 0.0;
  const double w1 = v * v;
  if constexpr (F == OcFormula::exact) {
    // the second stage vanishes outside this window; its edges would cost accuracy
    const Interval win = pooled_window(b, g, w1);
    e1 = std::max(e1, win.lo);
    e2 = std::min(e2, win.hi);
    if (!(e2 > e1)) return 0.0;
  }
  const double half = 0.5 * (e2 - e1);
  const double centre = 0.5 * (e1 + e2);
  const auto nodes = rule.nodes();
  const auto weights = rule.weights();
  double sum = 0.0;
  for (int j = 0; j < rule.size(); ++j) {
    const double y1 = centre + half * nodes[j];
    const double stage = F == OcFormula::exact ? second_stage(b, g, rule, w1, y1)
                                               : second_stage_printed(b, g, rule, w1, y1);
    sum += weights[j] * normal_pdf(y1) * stage;
  }
  return sum * half;
}

struct ChiNodes {
  std::vector<double> v;
  std::vector<double> w;  // includes the chi density
};

// The nearly Gaussian chi law gets panels split at its 1e-3 tail quantiles,
// half of the nodes on the bulk. The first-stage interval closes like
// sqrt(v_bound - v), so when the chi mass beyond v_bound matters the panel
// ending there clusters its nodes at v_bound.
ChiNodes chi_nodes(int nodes, int r1, double v_bound) {
  const double v_lo = std::sqrt(chi2_quantile(kChiTail, r1));
  const double v_hi = std::sqrt(chi2_upper_quantile(kChiTail, r1));
  ChiNodes out;
  if (v_bound <= v_lo) return out;
  const detail::ChiLaw chi(r1);
  auto push = [&](int count, double a, double b, bool cluster) {
    const GaussLegendre& rule = gauss_legendre(count);
    const ClusterRight cm{a, b};
    const auto x = rule.nodes();
    const auto w = rule.weights();
    for (int i = 0; i < rule.size(); ++i) {
      const double t = 0.5 * (x[i] + 1.0);
      const double v = cluster ? cm.x(t) : a + (b - a) * t;
      const double jac = cluster ? cm.jacobian(t) : b - a;
      out.v.push_back(v);
      out.w.push_back(0.5 * w[i] * jac * chi.density(v));
    }
  };
  constexpr double kNegligibleMass = 1e-10;
  constexpr double kBulkTail = 1e-3;
  const bool closes = v_bound < v_hi && chi2_ccdf(v_bound * v_bound, r1) >= kNegligibleMass;
  const double top = std::min(v_bound, v_hi);
  const double bulk_lo = std::sqrt(chi2_quantile(kBulkTail, r1));
  const double bulk_hi = std::sqrt(chi2_upper_quantile(kBulkTail, r1));
  std::vector<double> cuts{v_lo};
  if (bulk_lo < top) cuts.push_back(bulk_lo);
  if (bulk_hi < top) cuts.push_back(bulk_hi);
  cuts.push_back(top);
  const int panels = static_cast<int>(cuts.size()) - 1;
  const int tail = nodes / 4;
  // tails get `tail` nodes, the bulk the rest; an upper tail that closes at
  // v_bound gets nodes/8 on top of the budget
  std::vector<int> count(panels, tail);
  const int main_panel = panels == 1 ? 0 : 1;
  count[main_panel] = nodes - tail * (panels - 1);
  if (closes && panels == 3) count[2] += nodes / 8;
  for (int k = 0; k < panels; ++k) push(count[k], cuts[k], cuts[k + 1], closes && k == panels - 1);
  return out;
}

template <OcFormula F, class Bounds>
double joint_serial(const Bounds& b, const KernelGeometry& g, int nodes) {
  const GaussLegendre& rule = gauss_legendre(nodes);
  const ChiNodes chi = chi_nodes(nodes, g.r1, g.sqrt_r1 * b.first_sigma0() / g.sigma);
  double total = 0.0;
  for (std::size_t i = 0; i < chi.v.size(); ++i) total += chi.w[i] * first_stage_slice<F>(b, g, rule, chi.v[i]);
  return total;
}

template <OcFormula F, class Bounds>
double joint_parallel(const Bounds& b, const KernelGeometry& g, int nodes) {
  const GaussLegendre& rule = gauss_legendre(nodes);
  const ChiNodes chi = chi_nodes(nodes, g.r1, g.sqrt_r1 * b.first_sigma0() / g.sigma);
  const auto count = static_cast<long>(chi.v.size());
  std::vector<double> parts(chi.v.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) parts[i] = chi.w[i] * first_stage_slice<F>(b, g, rule, chi.v[i]);
  // fixed summation order keeps results independent of the thread count
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

}  // namespace

const char* to_string(OcFormula f) noexcept {
  return f == OcFormula::printed ? "printed" : "exact";
}

OcFormula parse_oc_formula(const std::string& name) {
  if (name == "exact") return OcFormula::exact;
  if (name == "printed") return OcFormula::printed;
  throw std::invalid_argument("unknown OC formula '" + name + "' (expected exact or printed)");
}

DoublePlan::DoublePlan(int n1_, double k1_, double k2_, int n2_, double k3_)
    : n1(n1_), k1(k1_), k2(k2_), n2(n2_), k3(k3_) {
  if (n1_ < 2 || n2_ < 2) throw std::invalid_argument("double plan requires n1, n2 >= 2");
  for (double k : {k1_, k2_, k3_}) {
    if (!(k > 0.0 && k < 1.0)) throw std::invalid_argument("double plan thresholds must lie in (0, 1)");
  }
  if (k1_ > k2_) throw std::invalid_argument("double plan requires k1 <= k2");
}

double pooled_sd(double w1, double y1, double y2, double w2, int n1, int n2, double sigma) {
  const double total = n1 + n2;
  const double cross = std::sqrt(double(n2)) * y1 - std::sqrt(double(n1)) * y2;
  return sigma * std::sqrt(total * (w1 + w2) + cross * cross) / std::sqrt((total - 1.0) * total);
}

A2Frame make_a2_frame(const DoublePlan& plan, double first_threshold, const ProcessPoint& pt,
                      const SpecLimits& lim, double w1, double y1, double y2, double w2) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  const double total = plan.n1 + plan.n2;
  const double sigma = pt.sigma;
  A2Frame f{w1, y1, y2, w2};
  f.S = pooled_sd(w1, y1, y2, w2, plan.n1, plan.n2, sigma);
  const double s0_3 = sigma0(plan.k3, lim);
  const double s0_f = sigma0(first_threshold, lim);
  const double base = sigma * std::sqrt(double(plan.n1)) * y1 + total * pt.mu;
  const double scale = sigma * std::sqrt(double(plan.n2));
  if (f.S < s0_3) {
    f.C1 = (total * mu_lower(f.S, plan.k3, lim) - base) / scale;
    f.C2 = (total * mu_upper(f.S, plan.k3, lim) - base) / scale;
  } else {
    f.C1 = f.C2 = nan;
  }
  const double cross = std::sqrt(double(plan.n2)) * y1 - std::sqrt(double(plan.n1)) * y2;
  f.D = (total * (total - 1.0) * std::pow(s0_3 / sigma, 2) - cross * cross) / total - w1;
  f.F = std::pow(s0_f / sigma, 2) * (plan.n1 - 1);
  if (w1 <= f.F) {
    const double s1 = sigma * std::sqrt(w1 / (plan.n1 - 1));
    const double sq = std::sqrt(double(plan.n1)) / sigma;
    f.E1 = sq * (mu_lower(s1, first_threshold, lim) - pt.mu);
    f.E2 = sq * (mu_upper(s1, first_threshold, lim) - pt.mu);
  } else {
    f.E1 = f.E2 = nan;
  }
  return f;
}

DoublePlanEvaluator::DoublePlanEvaluator(const DoublePlan& plan, const SpecLimits& lim,
                                         const QuadratureConfig& cfg)
    : plan_(plan),
      lim_(lim),
      cfg_(cfg),
      first_k1_(SinglePlan(plan.n1, plan.k1), lim),
      first_k2_(SinglePlan(plan.n1, plan.k2), lim),
      pooled_(plan.k3, lim, cfg.mu_table_accuracy),
      pooled_half_(plan.k3, lim, cfg.mu_table_accuracy) {
  if (cfg.nodes_per_dim < 8) throw std::invalid_argument("quadrature needs nodes_per_dim >= 8");
  if (!(cfg.abs_tol > 0.0)) throw std::invalid_argument("quadrature needs abs_tol > 0");
}

double DoublePlanEvaluator::joint(const IsolineTable& first, const ProcessPoint& pt, int nodes) const {
  const TableBounds bounds{first, pooled_, pooled_half_};
  const KernelGeometry g = make_geometry(plan_, pt, lim_);
  if (cfg_.formula == OcFormula::printed) return joint_parallel<OcFormula::printed>(bounds, g, nodes);
  return joint_parallel<OcFormula::exact>(bounds, g, nodes);
}

IntegralResult DoublePlanEvaluator::joint_with_error(const IsolineTable& first, const ProcessPoint& pt) const {
  const double value = joint(first, pt, cfg_.nodes_per_dim);
  if (!cfg_.estimate_error) return {value, 0.0};
  const double finer = joint(first, pt, cfg_.nodes_per_dim + 8);
  const double error = std::abs(value - finer);
  if (error > cfg_.abs_tol) {
    throw NumericalFailure("second-stage integral misses the requested tolerance", error);
  }
  return {value, error};
}

IntegralResult DoublePlanEvaluator::prob_A2_upper(const ProcessPoint& pt) const {
  return joint_with_error(first_k2_.table(), pt);
}

IntegralResult DoublePlanEvaluator::prob_A2_lower(const ProcessPoint& pt) const {
  if (plan_.k1 == plan_.k2) return prob_A2_upper(pt);
  return joint_with_error(first_k1_.table(), pt);
}

IntegralResult DoublePlanEvaluator::oc(const ProcessPoint& pt) const {
  const IntegralResult single = first_k1_.evaluate(pt);
  if (plan_.k1 == plan_.k2) return single;
  const IntegralResult upper = prob_A2_upper(pt);
  const IntegralResult lower = prob_A2_lower(pt);
  const double value = std::clamp(single.value + upper.value - lower.value, 0.0, 1.0);
  return {value, single.error + upper.error + lower.error};
}

double DoublePlanEvaluator::asn(const ProcessPoint& pt) const {
  if (plan_.k1 == plan_.k2) return plan_.n1;
  const double cont = std::max(0.0, first_k2_(pt) - first_k1_(pt));
  return plan_.n1 + plan_.n2 * std::min(cont, 1.0);
}

double DoublePlanEvaluator::oc_on_isoline(double p, double sigma) const {
  return oc(ProcessPoint{mu_upper(sigma, p, lim_), sigma}).value;
}

double DoublePlanEvaluator::asn_on_isoline(double p, double sigma) const {
  return asn(ProcessPoint{mu_upper(sigma, p, lim_), sigma});
}

IntegralResult DoublePlanEvaluator::prob_joint_reference(double first_threshold, const ProcessPoint& pt) const {
  const DirectBounds bounds{first_threshold,
                            plan_.k3,
                            lim_,
                            sigma0(first_threshold, lim_),
                            sigma0(plan_.k3, lim_),
                            1.0 / -normal_quantile(plan_.k3)};
  const KernelGeometry g = make_geometry(plan_, pt, lim_);
  if (cfg_.formula == OcFormula::printed) {
    return {joint_serial<OcFormula::printed>(bounds, g, cfg_.nodes_per_dim), 0.0};
  }
  return {joint_serial<OcFormula::exact>(bounds, g, cfg_.nodes_per_dim), 0.0};
}

IntegralResult prob_A2_upper(const DoublePlan& plan, const ProcessPoint& pt, const SpecLimits& lim,
                             const QuadratureConfig& cfg) {
  return DoublePlanEvaluator(plan, lim, cfg).prob_A2_upper(pt);
}

IntegralResult prob_A2_lower(const DoublePlan& plan, const ProcessPoint& pt, const SpecLimits& lim,
                             const QuadratureConfig& cfg) {
  return DoublePlanEvaluator(plan, lim, cfg).prob_A2_lower(pt);
}

IntegralResult oc_double(const DoublePlan& plan, const ProcessPoint& pt, const SpecLimits& lim,
                         const QuadratureConfig& cfg) {
  return DoublePlanEvaluator(plan, lim, cfg).oc(pt);
}

double asn_double(const DoublePlan& plan, const ProcessPoint& pt, const SpecLimits& lim) {
  return DoublePlanEvaluator(plan, lim).asn(pt);
}

BandExtreme band_extreme_double(const DoublePlanEvaluator& eval, double p, Extremum mode) {
  return extremize_band([&](double s) { return eval.oc_on_isoline(p, s); },
                        sigma0(p, eval.limits()), mode);
}

BandExtreme band_extreme_double(const DoublePlan& plan, double p, Extremum mode,
                                const SpecLimits& lim, const QuadratureConfig& cfg) {
  return band_extreme_double(DoublePlanEvaluator(plan, lim, cfg), p, mode);
}

AsnMaximum asn_max(const DoublePlan& plan, const SpecLimits& lim) {
  const DoublePlanEvaluator eval(plan, lim);
  auto band_max = [&](double log_p) {
    const double p = std::exp(log_p);
    return extremize_band([&](double s) { return eval.asn_on_isoline(p, s); }, sigma0(p, lim),
                          Extremum::max, 32, 1e-6);
  };
  constexpr int kGrid = 48;
  const double lo = std::log(1e-5);
  const double hi = std::log(0.5);
  std::vector<double> values(kGrid);
  for (int i = 0; i < kGrid; ++i) values[i] = band_max(lo + (hi - lo) * i / (kGrid - 1)).value;
  const int best = static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
  const double a = lo + (hi - lo) * std::max(best - 1, 0) / (kGrid - 1);
  const double b = lo + (hi - lo) * std::min(best + 1, kGrid - 1) / (kGrid - 1);
  const ScalarExtreme refined =
      golden_section_max([&](double x) { return band_max(x).value; }, a, b, 1e-7);
  const double p = std::exp(refined.x);
  const BandExtreme at = band_max(refined.x);
  return {ProcessPoint{mu_upper(at.sigma_star, p, lim), at.sigma_star}, p, at.value};
}

}  // namespace amdsp

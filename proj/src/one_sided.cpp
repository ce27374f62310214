#include "amdsp/one_sided.hpp"

#include "amdsp/detail/support.hpp"
#include "amdsp/special_functions.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <utility>

namespace amdsp {

namespace {

using detail::kNormalCut;

constexpr double kChiTail = 1e-16;
constexpr double kInf = std::numeric_limits<double>::infinity();

// With sigma = 1 and U = 0 the fraction defective is Phi(mu).
double one_sided_mean(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("fraction defective must lie in (0, 1)");
  return normal_quantile(p);
}

double single_at_mean(int n, double l, double mu) {
  const int r = n - 1;
  const double sqrt_r = std::sqrt(double(r));
  const double delta = std::sqrt(double(n)) * mu;
  const double lo = std::sqrt(chi2_quantile(kChiTail, r));
  const double hi = std::sqrt(chi2_upper_quantile(kChiTail, r));
  const detail::ChiLaw chi(r);
  auto f = [&](double v) { return normal_cdf(l * v / sqrt_r - delta) * chi.density(v); };
  return std::clamp(integrate_adaptive(f, lo, hi, 1e-13).value, 0.0, 1.0);
}

// Root of an increasing-or-decreasing f near `guess`: step outward until the
// sign changes, then TOMS 748 to a relative width of about 1e-10.
template <class F>
double root_near(F&& f, double guess, double step, double lo_limit, double hi_limit) {
  double a = guess, fa = f(a);
  if (fa == 0.0) return a;
  double b = a, fb = fa;
  for (int i = 0; i < 60; ++i) {
    // try both directions, growing the step
    const double up = std::min(a + step, hi_limit);
    const double fu = f(up);
    if ((fu < 0) != (fa < 0)) { b = up; fb = fu; break; }
    const double down = std::max(a - step, lo_limit);
    const double fd = f(down);
    if ((fd < 0) != (fa < 0)) { b = down; fb = fd; break; }
    // keep the side closer to zero
    if (std::abs(fu) < std::abs(fd)) { a = up; fa = fu; } else { a = down; fa = fd; }
    step *= 1.6;
  }
  if ((fa < 0) == (fb < 0)) throw NumericalFailure("root_near: no sign change found", std::abs(fa));
  if (b < a) { std::swap(a, b); std::swap(fa, fb); }
  std::uintmax_t iters = 100;
  auto tol = boost::math::tools::eps_tolerance<double>(34);
  const auto [x0, x1] = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
  return 0.5 * (x0 + x1);
}

struct Sizes {
  int n1, n2, r1, r2, total;
  double sqrt_n1, sqrt_n2, sqrt_total, sqrt_r1, sqrt_pooled;
};

Sizes make_sizes(int n1, int n2) {
  Sizes s{n1, n2, n1 - 1, n2 - 1, n1 + n2, 0, 0, 0, 0, 0};
  s.sqrt_n1 = std::sqrt(double(n1));
  s.sqrt_n2 = std::sqrt(double(n2));
  s.sqrt_total = std::sqrt(double(s.total));
  s.sqrt_r1 = std::sqrt(double(s.r1));
  s.sqrt_pooled = std::sqrt(double(s.total - 1));
  return s;
}

// Probability over (y2, w2) that the pooled statistic accepts, given w1, y1.
// q = sqrt(N) Xbar_pooled; accept iff q <= l3 S with (N-1) S^2 = w1 + w2 + V^2.
double pooled_accept(const Sizes& z, const GaussLegendre& rule, double l3, double mu, double w1,
                     double y1) {
  const double shift = z.sqrt_total * mu;
  auto q_of = [&](double y2) { return (z.sqrt_n1 * y1 + z.sqrt_n2 * y2) / z.sqrt_total + shift; };
  auto v_of = [&](double y2) { return (z.sqrt_n2 * y1 - z.sqrt_n1 * y2) / z.sqrt_total; };
  if (l3 == 0.0) {
    const double y2_star = (-z.sqrt_total * shift - z.sqrt_n1 * y1) / z.sqrt_n2;
    return normal_cdf(y2_star);
  }
  // region where sign(l3) q >= |l3| S is possible for some w2 >= 0
  auto margin = [&](double y2) {
    const double v = v_of(y2);
    return z.sqrt_pooled * q_of(y2) / l3 - std::sqrt(w1 + v * v);
  };
  const detail::Interval support = detail::concave_support(margin, -kNormalCut, kNormalCut);
  double inner = 0.0;
  if (!support.empty()) {
    const detail::SmoothStep map{support.lo, support.hi - support.lo};
    const auto nodes = rule.nodes();
    const auto weights = rule.weights();
    for (int i = 0; i < rule.size(); ++i) {
      const double t = 0.5 * (nodes[i] + 1.0);
      const double y2 = map.x(t);
      const double q = q_of(y2);
      const double v = v_of(y2);
      const double w2_max = (z.total - 1) * q * q / (l3 * l3) - w1 - v * v;
      if (w2_max <= 0.0) continue;
      inner += 0.5 * weights[i] * map.jacobian(t) * normal_pdf(y2) * chi2_cdf(w2_max, z.r2);
    }
  }
  // l3 < 0: accept needs q < 0 and W2 below the bound; l3 > 0: reject needs it
  return l3 < 0.0 ? inner : 1.0 - inner;
}

double continue_and_accept(const OneSidedDoublePlan& plan, double mu, int nodes) {
  if (plan.l1 == plan.l2) return 0.0;
  const Sizes z = make_sizes(plan.n1, plan.n2);
  const GaussLegendre& rule = gauss_legendre(nodes);
  const double v_lo = std::sqrt(chi2_quantile(kChiTail, z.r1));
  const double v_hi = std::sqrt(chi2_upper_quantile(kChiTail, z.r1));
  const detail::ChiLaw chi(z.r1);
  const auto gl_nodes = rule.nodes();
  const auto gl_weights = rule.weights();
  std::vector<double> parts(rule.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < rule.size(); ++i) {
    const double v = v_lo + (v_hi - v_lo) * 0.5 * (gl_nodes[i] + 1.0);
    const double s1 = v / z.sqrt_r1;
    const double a = std::max(plan.l1 * s1 - z.sqrt_n1 * mu, -kNormalCut);
    const double b = std::min(plan.l2 * s1 - z.sqrt_n1 * mu, kNormalCut);
    if (!(b > a)) continue;
    const double w1 = v * v;
    double sum = 0.0;
    for (int j = 0; j < rule.size(); ++j) {
      const double y1 = 0.5 * (a + b) + 0.5 * (b - a) * gl_nodes[j];
      sum += gl_weights[j] * normal_pdf(y1) * pooled_accept(z, rule, plan.l3, mu, w1, y1);
    }
    parts[i] = 0.5 * gl_weights[i] * (v_hi - v_lo) * chi.density(v) * 0.5 * (b - a) * sum;
  }
  double total = 0.0;
  for (double x : parts) total += x;
  return total;
}

double oc_double_at_mean(const OneSidedDoublePlan& plan, double mu, int nodes) {
  const double value = single_at_mean(plan.n1, plan.l1, mu) + continue_and_accept(plan, mu, nodes);
  return std::clamp(value, 0.0, 1.0);
}

// Threshold l with L(n, l; p) = target.
double single_threshold(int n, double p, double target) {
  const double mu = one_sided_mean(p);
  // normal approximation of the noncentral t quantile as the start
  const double z = normal_quantile(target);
  const double guess = std::sqrt(double(n)) * mu + z * std::sqrt(1.0 + n * mu * mu / (2.0 * (n - 1)));
  return root_near([&](double l) { return single_at_mean(n, l, mu) - target; }, guess, 0.1, -1e3, 1e3);
}

}  // namespace

OneSidedDoublePlan::OneSidedDoublePlan(int n1_, double l1_, double l2_, int n2_, double l3_)
    : n1(n1_), l1(l1_), l2(l2_), n2(n2_), l3(l3_) {
  if (n1_ < 2 || n2_ < 2) throw std::invalid_argument("one-sided plan requires n1, n2 >= 2");
  if (!(std::isfinite(l1_) && std::isfinite(l2_) && std::isfinite(l3_))) {
    throw std::invalid_argument("one-sided plan thresholds must be finite");
  }
  if (l1_ > l2_) throw std::invalid_argument("one-sided plan requires l1 <= l2");
}

double oc_one_sided_single(int n, double l, double p) {
  if (n < 2) throw std::invalid_argument("one-sided plan requires n >= 2");
  return single_at_mean(n, l, one_sided_mean(p));
}

double oc_one_sided_double(const OneSidedDoublePlan& plan, double p, int nodes) {
  return oc_double_at_mean(plan, one_sided_mean(p), nodes);
}

double asn_one_sided(const OneSidedDoublePlan& plan, double p) {
  const double mu = one_sided_mean(p);
  const double cont = single_at_mean(plan.n1, plan.l2, mu) - single_at_mean(plan.n1, plan.l1, mu);
  return plan.n1 + plan.n2 * std::clamp(cont, 0.0, 1.0);
}

OneSidedAsnMax n_max_one_sided(const OneSidedDoublePlan& plan) {
  auto asn = [&](double mu) {
    return plan.n2 * (single_at_mean(plan.n1, plan.l2, mu) - single_at_mean(plan.n1, plan.l1, mu));
  };
  // the continuation probability peaks where the noncentral t centre lies
  // between l1 and l2
  const double centre = 0.5 * (plan.l1 + plan.l2) / std::sqrt(double(plan.n1));
  constexpr int kGrid = 24;
  double best_mu = centre, best = -kInf;
  const double lo = centre - 3.0, hi = centre + 3.0;
  for (int i = 0; i <= kGrid; ++i) {
    const double mu = lo + (hi - lo) * i / kGrid;
    const double a = asn(mu);
    if (a > best) { best = a; best_mu = mu; }
  }
  const double cell = (hi - lo) / kGrid;
  const ScalarExtreme ext = golden_section_max(asn, best_mu - cell, best_mu + cell, 1e-9);
  return {normal_cdf(ext.x), plan.n1 + ext.value};
}

DoublePlan translate_to_two_sided(const OneSidedDoublePlan& plan) {
  const double sqrt_n1 = std::sqrt(double(plan.n1));
  return DoublePlan(plan.n1, normal_cdf(plan.l1 / sqrt_n1), normal_cdf(plan.l2 / sqrt_n1), plan.n2,
                    normal_cdf(plan.l3 / std::sqrt(double(plan.n1 + plan.n2))));
}

OneSidedDoublePlan translate_to_one_sided(const DoublePlan& plan) {
  const double sqrt_n1 = std::sqrt(double(plan.n1));
  return OneSidedDoublePlan(plan.n1, sqrt_n1 * normal_quantile(plan.k1), sqrt_n1 * normal_quantile(plan.k2),
                            plan.n2, std::sqrt(double(plan.n1 + plan.n2)) * normal_quantile(plan.k3));
}

OneSidedSingleDesign design_one_sided_single(const DesignRequirement& req) {
  auto at = [&](int n) {
    OneSidedSingleDesign d;
    d.n = n;
    d.l_alpha = single_threshold(n, req.p1, 1.0 - req.alpha);
    d.l_beta = single_threshold(n, req.p2, req.beta);
    d.l = 0.5 * (d.l_alpha + d.l_beta);
    return d;
  };
  auto ok = [](const OneSidedSingleDesign& d) { return d.l_alpha <= d.l_beta; };
  const double za = normal_quantile(1.0 - req.alpha);
  const double zb = normal_quantile(1.0 - req.beta);
  const double z1 = normal_quantile(1.0 - req.p1);
  const double z2 = normal_quantile(1.0 - req.p2);
  const double kappa = (z1 * zb + z2 * za) / (za + zb);
  const double ratio = (za + zb) / (z1 - z2);
  int n = std::max(2, static_cast<int>(std::ceil((1.0 + 0.5 * kappa * kappa) * ratio * ratio)));
  OneSidedSingleDesign d = at(n);
  if (ok(d)) {
    while (n > 2) {
      const OneSidedSingleDesign smaller = at(n - 1);
      if (!ok(smaller)) break;
      d = smaller;
      --n;
    }
    return d;
  }
  constexpr int kMaxN = 20000;
  while (!ok(d)) {
    if (++n > kMaxN) throw InfeasibleRequirement("no one-sided single plan up to n = 20000");
    d = at(n);
  }
  return d;
}

namespace {

// Solver for fixed (n1, n2): l3 from L(p2) = beta, l2 from L(p1) = 1 - alpha.
class SizeSolver {
 public:
  SizeSolver(const DesignRequirement& req, int n1, int n2, int nodes)
      : req_(req), n1_(n1), n2_(n2), nodes_(nodes), mu1_(one_sided_mean(req.p1)), mu2_(one_sided_mean(req.p2)) {
    l_alpha_ = single_threshold(n1, req.p1, 1.0 - req.alpha);
    l_beta_ = single_threshold(n1, req.p2, req.beta);
    l3_guess_ = std::sqrt(double(n1 + n2)) * normal_quantile(req.p2) * 0.9;
  }

  double l_alpha() const { return l_alpha_; }
  double l_beta() const { return l_beta_; }

  double solve_l3(double l1, double l2) {
    auto f = [&](double l3) {
      return oc_double_at_mean(OneSidedDoublePlan(n1_, l1, l2, n2_, l3), mu2_, nodes_) - req_.beta;
    };
    l3_guess_ = root_near(f, l3_guess_, 0.02, -1e3, 1e3);
    return l3_guess_;
  }

  // L(p1) - (1 - alpha) after l3 has been fitted to the beta constraint.
  double alpha_slack(double l1, double l2) {
    const double l3 = solve_l3(l1, l2);
    return oc_double_at_mean(OneSidedDoublePlan(n1_, l1, l2, n2_, l3), mu1_, nodes_) - (1.0 - req_.alpha);
  }

  // Feasible plan on the constraint surface for this l1, or nullopt. Newton
  // on (l2, l3) from the last solution first; nested 1-D solves otherwise.
  std::optional<OneSidedDoublePlan> plan_for(double l1, double l2_guess) {
    if (!(l1 < l_beta_)) return std::nullopt;
    if (!solved_.empty()) {
      // warm start from the solution with the nearest l1
      const auto near = std::min_element(solved_.begin(), solved_.end(), [&](const auto& a, const auto& b) {
        return std::abs(a.l1 - l1) < std::abs(b.l1 - l1);
      });
      if (auto p = newton(l1, near->l2, near->l3)) {
        solved_.push_back(*p);
        return p;
      }
    }
    auto p = nested(l1, l2_guess);
    if (p) solved_.push_back(*p);
    return p;
  }

  std::optional<OneSidedDoublePlan> newton(double l1, double x2, double x3) {
    const double l2_min = std::max(l_alpha_, l_beta_) + 1e-9;
    x2 = std::max(x2, l2_min + 1e-6);
    auto residual = [&](double a, double b, double out[2]) {
      const OneSidedDoublePlan plan(n1_, l1, a, n2_, b);
      out[0] = oc_double_at_mean(plan, mu1_, nodes_) - (1.0 - req_.alpha);
      out[1] = oc_double_at_mean(plan, mu2_, nodes_) - req_.beta;
    };
    constexpr double h = 1e-5;
    double f[2], fa[2], fb[2];
    double j00 = 0, j01 = 0, j10 = 0, j11 = 0;
    bool fresh = false;
    residual(x2, x3, f);
    // chord iterations; the Jacobian is refreshed only when progress stalls
    for (int it = 0; it < 24; ++it) {
      const double norm = std::max(std::abs(f[0]), std::abs(f[1]));
      if (norm < 1e-11) break;
      if (!fresh) {
        residual(x2 + h, x3, fa);
        residual(x2, x3 + h, fb);
        j00 = (fa[0] - f[0]) / h; j10 = (fa[1] - f[1]) / h;
        j01 = (fb[0] - f[0]) / h; j11 = (fb[1] - f[1]) / h;
        fresh = true;
      }
      const double det = j00 * j11 - j01 * j10;
      if (!(std::abs(det) > 0.0)) return std::nullopt;
      double d2 = -(j11 * f[0] - j01 * f[1]) / det;
      double d3 = -(-j10 * f[0] + j00 * f[1]) / det;
      const double scale = std::max({1.0, std::abs(d2), std::abs(d3)});
      x2 = std::max(x2 + d2 / scale, l2_min);
      x3 += d3 / scale;
      residual(x2, x3, f);
      if (std::max(std::abs(f[0]), std::abs(f[1])) > 0.25 * norm) fresh = false;
    }
    if (!(std::abs(f[0]) < 1e-9 && std::abs(f[1]) < 1e-9)) return std::nullopt;
    return OneSidedDoublePlan(n1_, l1, x2, n2_, x3);
  }

  std::optional<OneSidedDoublePlan> nested(double l1, double l2_guess) {
    const double l2_min = std::max(l_alpha_, l_beta_) + 1e-9;
    auto f = [&](double l2) { return alpha_slack(l1, l2); };
    // slack rises with l2; grow from a warm start until it turns positive
    double a = std::max(l2_min, l2_guess - 0.05);
    double fa = f(a);
    if (fa > 0.0) {
      if (a == l2_min) return std::nullopt;
      double b = a;
      while (fa > 0.0) {
        b = a;
        a = std::max(l2_min, a - 0.1);
        fa = f(a);
        if (a == l2_min && fa > 0.0) return std::nullopt;
      }
      return finish(l1, a, b, fa);
    }
    double b = a, fb = fa;
    double step = 0.1;
    while (fb <= 0.0) {
      a = b;
      fa = fb;
      b += step;
      step *= 1.6;
      if (b > l2_min + 40.0) return std::nullopt;
      fb = f(b);
    }
    return finish(l1, a, b, fa);
  }

  OneSidedDesign evaluate(const OneSidedDoublePlan& plan) const {
    OneSidedDesign d;
    d.plan = plan;
    d.n_max = n_max_one_sided(plan).value;
    d.oc_p1 = oc_double_at_mean(plan, mu1_, nodes_);
    d.oc_p2 = oc_double_at_mean(plan, mu2_, nodes_);
    return d;
  }

 private:
  std::optional<OneSidedDoublePlan> finish(double l1, double a, double b, double fa) {
    auto f = [&](double l2) { return alpha_slack(l1, l2); };
    const double fb = f(b);
    std::uintmax_t iters = 100;
    auto tol = boost::math::tools::eps_tolerance<double>(34);
    const auto [x0, x1] = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
    // upper end keeps the alpha constraint on the feasible side
    const double l2 = x1;
    const double l3 = solve_l3(l1, l2);
    return OneSidedDoublePlan(n1_, l1, l2, n2_, l3);
  }

  DesignRequirement req_;
  int n1_, n2_, nodes_;
  double mu1_, mu2_;
  double l_alpha_ = 0.0, l_beta_ = 0.0;
  double l3_guess_ = 0.0;
  std::vector<OneSidedDoublePlan> solved_;
};

}  // namespace

OneSidedDesign best_one_sided_for_sizes(const DesignRequirement& req, int n1, int n2, int nodes,
                                        double l1_tol, double gap_guess) {
  SizeSolver solver(req, n1, n2, nodes);
  const double top = solver.l_beta();
  double l2_guess = std::max(solver.l_alpha(), solver.l_beta());
  // objective in gap = l_beta - l1 > 0
  std::map<double, std::pair<double, OneSidedDoublePlan>> seen;
  auto objective = [&](double gap) {
    auto it = seen.find(gap);
    if (it != seen.end()) return it->second.first;
    const auto plan = solver.plan_for(top - gap, l2_guess);
    double value = kInf;
    OneSidedDoublePlan p;
    if (plan) {
      l2_guess = plan->l2;
      p = *plan;
      value = n_max_one_sided(*plan).value;
    }
    seen.emplace(gap, std::make_pair(value, p));
    return value;
  };

  // bracket a minimum by walking downhill from the guess
  constexpr double kMinGap = 1e-3;
  double h = 0.25;
  double b = std::max(gap_guess, kMinGap + h);
  double fb = objective(b);
  for (int i = 0; i < 12 && !std::isfinite(fb); ++i) {
    b += 0.5;
    fb = objective(b);
  }
  if (!std::isfinite(fb)) throw InfeasibleRequirement("no feasible one-sided plan for these sample sizes");
  double a = std::max(b - h, kMinGap), fa = objective(a);
  double c = b + h, fc = objective(c);
  for (int i = 0; i < 40 && !(fb <= fa && fb <= fc); ++i) {
    if (fa < fb) {
      if (a <= kMinGap) break;
      c = b; fc = fb;
      b = a; fb = fa;
      h *= 1.5;
      a = std::max(b - h, kMinGap);
      fa = objective(a);
    } else {
      a = b; fa = fb;
      b = c; fb = fc;
      h *= 1.5;
      c = b + h;
      fc = objective(c);
    }
  }
  const int bits = std::max(8, static_cast<int>(-std::log2(l1_tol / std::max(1.0, c))));
  std::uintmax_t iters = 60;
  boost::math::tools::brent_find_minima(objective, a, c, bits, iters);

  auto best_it = std::min_element(seen.begin(), seen.end(),
                                  [](const auto& x, const auto& y) { return x.second.first < y.second.first; });
  if (!std::isfinite(best_it->second.first)) {
    throw InfeasibleRequirement("no feasible one-sided plan for these sample sizes");
  }
  OneSidedDesign out = solver.evaluate(best_it->second.second);
  out.gap = best_it->first;
  return out;
}

OneSidedDesign design_one_sided_am(const DesignRequirement& req, const OneSidedSearchOptions& opt) {
  int n1 = opt.n1_start, n2 = opt.n2_start;
  if (n1 < 2 || n2 < 2) {
    const int n = design_one_sided_single(req).n;
    n1 = std::max(2, static_cast<int>(std::lround(0.64 * n)));
    n2 = std::max(2, static_cast<int>(std::lround(0.5 * n)));
  }
  std::map<std::pair<int, int>, std::optional<OneSidedDesign>> cache;
  double gap_hint = opt.gap_start;
  auto at = [&](int a, int b) -> const std::optional<OneSidedDesign>& {
    auto key = std::make_pair(a, b);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::optional<OneSidedDesign> d;
    if (a >= 2 && b >= 2) {
      try {
        d = best_one_sided_for_sizes(req, a, b, opt.nodes, opt.l1_tol, gap_hint);
      } catch (const InfeasibleRequirement&) {
      }
    }
    return cache.emplace(key, std::move(d)).first->second;
  };
  auto value = [&](int a, int b) {
    const auto& d = at(a, b);
    return d ? d->n_max : kInf;
  };

  // find a feasible start by growing the second stage
  for (int i = 0; i < 40 && !std::isfinite(value(n1, n2)); ++i) {
    n1 += 1;
    n2 += 1;
  }
  if (!std::isfinite(value(n1, n2))) throw InfeasibleRequirement("no feasible one-sided double plan found");

  for (int move = 0; move < opt.max_moves; ++move) {
    int best_a = n1, best_b = n2;
    double best = value(n1, n2);
    for (int da = -1; da <= 1; ++da) {
      for (int db = -1; db <= 1; ++db) {
        if (da == 0 && db == 0) continue;
        const double v = value(n1 + da, n2 + db);
        if (v < best - 1e-9) { best = v; best_a = n1 + da; best_b = n2 + db; }
      }
    }
    if (best_a == n1 && best_b == n2) return *at(n1, n2);
    gap_hint = at(best_a, best_b)->gap;
    n1 = best_a;
    n2 = best_b;
  }
  throw NumericalFailure("one-sided search did not settle within the move budget", 0.0);
}

TwoSidedDesign design_two_sided_am(const DesignRequirement& req, const SpecLimits& lim,
                                   const TwoSidedDesignOptions& opt) {
  if (!(opt.step > 0.0)) throw std::invalid_argument("design_two_sided_am: step must be positive");
  TwoSidedDesign out;
  out.single = design_single(req, lim);
  double alpha2 = opt.alpha_start > 0.0 ? opt.alpha_start : out.single.alpha_star;
  const double beta2 = req.beta;
  OneSidedSearchOptions search = opt.search;
  for (int it = 0; it < opt.max_iterations && alpha2 > 0.0; ++it) {
    const OneSidedDesign one = design_one_sided_am(DesignRequirement(req.p1, req.p2, alpha2, beta2), search);
    TighteningRow row;
    row.alpha_star2 = alpha2;
    row.beta_star2 = beta2;
    row.one_sided = one.plan;
    row.candidate = translate_to_two_sided(one.plan);
    row.n_max = one.n_max;
    const DoublePlanEvaluator eval(row.candidate, lim, opt.band_quadrature);
    row.max_oc_p2 = band_extreme_double(eval, req.p2, Extremum::max);
    row.min_oc_p1 = band_extreme_double(eval, req.p1, Extremum::min);
    row.passes = row.max_oc_p2.value <= req.beta && row.min_oc_p1.value >= 1.0 - req.alpha;
    out.trace.push_back(row);
    if (opt.on_row) opt.on_row(row);
    if (row.passes) {
      out.plan = row.candidate;
      return out;
    }
    // warm start the next search where this one ended
    search.n1_start = one.plan.n1;
    search.n2_start = one.plan.n2;
    search.gap_start = one.gap;
    alpha2 = std::round((alpha2 - opt.step) * 1e9) / 1e9;
  }
  throw TighteningExhausted("tightening loop ended without meeting the two-sided band conditions",
                            std::move(out.trace));
}

}  // namespace amdsp

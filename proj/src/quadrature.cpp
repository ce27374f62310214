#include "amdsp/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <queue>

namespace amdsp {

GaussLegendre::GaussLegendre(int n) {
  if (n < 1) throw std::invalid_argument("GaussLegendre: n must be positive");
  nodes_.resize(n);
  weights_.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j;
    }
    dp = n * (x * p0 - p1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes_[i] = -x;
    nodes_[n - 1 - i] = x;
    weights_[i] = w;
    weights_[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes_[n / 2] = 0.0;
}

void GaussLegendre::map(double a, double b, std::span<double> x, std::span<double> w) const {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    x[i] = mid + half * nodes_[i];
    w[i] = half * weights_[i];
  }
}

const GaussLegendre& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussLegendre>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussLegendre>(n);
  return *slot;
}

IntegralResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol, int max_panels) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  if (a == b) return {};
  auto eval = [&](double lo, double hi) {
    double err = 0.0;
    const double v = GK::integrate(f, lo, hi, 0, 0.0, &err);
    return Panel{lo, hi, v, err};
  };
  std::priority_queue<Panel> queue;
  Panel first = eval(a, b);
  double total = first.value;
  double total_err = first.error;
  queue.push(first);
  int panels = 1;
  while (total_err > abs_tol) {
    if (panels >= max_panels) {
      throw NumericalFailure("adaptive quadrature did not reach tolerance", total_err);
    }
    const Panel worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel left = eval(worst.a, mid);
    const Panel right = eval(mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++panels;
    if (!(std::abs(mid - worst.a) > 0.0)) break;
  }
  // re-sum to shed accumulated rounding from the running updates
  total = 0.0;
  total_err = 0.0;
  while (!queue.empty()) {
    total += queue.top().value;
    total_err += queue.top().error;
    queue.pop();
  }
  return {total, total_err};
}

ScalarExtreme golden_section_max(const std::function<double(double)>& f, double a, double b,
                                 double x_tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (std::abs(b - a) > x_tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? ScalarExtreme{c, fc} : ScalarExtreme{d, fd};
}

double bracketed_root(const std::function<double(double)>& f, double a, double b, int max_iter) {
  const double fa = f(a);
  const double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa < 0) == (fb < 0)) throw NumericalFailure("bracketed_root: endpoints do not bracket a root", 0.0);
  std::uintmax_t iters = max_iter;
  auto tol = boost::math::tools::eps_tolerance<double>(52);
  const auto [lo, hi] = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
  return 0.5 * (lo + hi);
}

ChebyshevTable::ChebyshevTable(const std::function<double(double)>& f, double a, double b,
                               double abs_tol, int degree, int max_depth)
    : degree_(degree), lo_(a), hi_(b) {
  if (!(b > a)) throw std::invalid_argument("ChebyshevTable: empty interval");
  breaks_.push_back(a);
  build(f, a, b, abs_tol, max_depth);
}

void ChebyshevTable::build(const std::function<double(double)>& f, double a, double b,
                           double abs_tol, int depth) {
  const int n = degree_ + 1;
  std::vector<double> fx(n);
  for (int j = 0; j < n; ++j) {
    const double t = std::cos(std::numbers::pi * (j + 0.5) / n);
    fx[j] = f(0.5 * (a + b) + 0.5 * (b - a) * t);
  }
  std::vector<double> c(n);
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += fx[j] * std::cos(std::numbers::pi * k * (j + 0.5) / n);
    c[k] = 2.0 * s / n;
  }
  c[0] *= 0.5;
  const double tail = std::abs(c[n - 1]) + std::abs(c[n - 2]) + std::abs(c[n - 3]);
  if (tail > abs_tol && depth > 0) {
    const double mid = 0.5 * (a + b);
    build(f, a, mid, abs_tol, depth - 1);
    build(f, mid, b, abs_tol, depth - 1);
    return;
  }
  breaks_.push_back(b);
  coeffs_.insert(coeffs_.end(), c.begin(), c.end());
}

double ChebyshevTable::operator()(double x) const {
  x = std::clamp(x, lo_, hi_);
  auto it = std::upper_bound(breaks_.begin() + 1, breaks_.end() - 1, x);
  const std::size_t panel = static_cast<std::size_t>(it - breaks_.begin()) - 1;
  const double a = breaks_[panel];
  const double b = breaks_[panel + 1];
  const double t = (2.0 * x - a - b) / (b - a);
  const double* c = coeffs_.data() + panel * (degree_ + 1);
  double b1 = 0.0, b2 = 0.0;
  for (int k = degree_; k >= 1; --k) {
    const double tmp = 2.0 * t * b1 - b2 + c[k];
    b2 = b1;
    b1 = tmp;
  }
  return t * b1 - b2 + c[0];
}

}  // namespace amdsp

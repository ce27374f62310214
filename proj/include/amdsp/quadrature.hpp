#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace amdsp {

/// Raised when an integral or a root solve misses its tolerance.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_error_(achieved) {}
  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

/// n-point Gauss-Legendre rule on [-1, 1].
class GaussLegendre {
 public:
  explicit GaussLegendre(int n);

  int size() const noexcept { return static_cast<int>(nodes_.size()); }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }

  /// Nodes/weights mapped onto [a, b].
  void map(double a, double b, std::span<double> x, std::span<double> w) const;

  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) sum += weights_[i] * f(mid + half * nodes_[i]);
    return sum * half;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Cached rule; safe to call concurrently.
const GaussLegendre& gauss_legendre(int n);

struct IntegralResult {
  double value = 0.0;
  double error = 0.0;
};

/// Globally adaptive Gauss-Kronrod (G10/K21) with an absolute tolerance.
/// Throws NumericalFailure if the panel budget runs out before tol is met.
IntegralResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol, int max_panels = 400);

/// Maximise (or minimise) a unimodal function on [a, b] by golden section.
struct ScalarExtreme {
  double x = 0.0;
  double value = 0.0;
};
ScalarExtreme golden_section_max(const std::function<double(double)>& f, double a, double b,
                                 double x_tol);

/// Root of a function with f(a), f(b) of opposite sign (TOMS 748).
double bracketed_root(const std::function<double(double)>& f, double a, double b,
                      int max_iter = 200);

/// Piecewise Chebyshev interpolant of a smooth function on [a, b]. Panels are
/// bisected until the trailing coefficients fall below the tolerance.
class ChebyshevTable {
 public:
  ChebyshevTable() = default;
  ChebyshevTable(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 int degree = 24, int max_depth = 14);

  double operator()(double x) const;
  double lower() const noexcept { return lo_; }
  double upper() const noexcept { return hi_; }
  std::size_t panel_count() const noexcept { return breaks_.empty() ? 0 : breaks_.size() - 1; }

 private:
  void build(const std::function<double(double)>& f, double a, double b, double abs_tol, int depth);

  int degree_ = 0;
  double lo_ = 0.0;
  double hi_ = 0.0;
  std::vector<double> breaks_;
  std::vector<double> coeffs_;  // (degree_+1) per panel
};

}  // namespace amdsp

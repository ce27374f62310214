#include "amdsp/special_functions.hpp"

#include <boost/math/distributions/normal.hpp>

#include <doctest.h>

#include <cmath>

using namespace amdsp;

TEST_SUITE("special_functions") {
  TEST_CASE("normal cdf against boost") {
    const boost::math::normal z;
    for (double x = -30.0; x <= 8.0; x += 0.37) {
      const double ref = boost::math::cdf(z, x);
      CHECK(std::abs(normal_cdf(x) - ref) <= 1e-15 + 1e-13 * ref);
      const double cref = boost::math::cdf(boost::math::complement(z, x));
      CHECK(std::abs(normal_ccdf(x) - cref) <= 1e-15 + 1e-13 * cref);
      CHECK(std::abs(normal_pdf(x) - boost::math::pdf(z, x)) <= 1e-15);
    }
  }

  TEST_CASE("quantile round trips to 1e-10") {
    for (double x = -8.0; x <= 4.0; x += 0.01) {
      CHECK(std::abs(normal_quantile(normal_cdf(x)) - x) <= 1e-10);
    }
    for (double q : {1e-15, 1e-10, 1e-6, 0.001, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999999, 1 - 1e-12}) {
      CHECK(std::abs(normal_cdf(normal_quantile(q)) - q) <= 1e-10 * std::max(q, 1e-6));
    }
    CHECK(std::abs(normal_quantile(0.5)) <= 1e-16);
  }

  TEST_CASE("normal interval keeps tail precision") {
    // both endpoints deep in the upper tail: difference of complements
    const boost::math::normal z;
    const double ref = boost::math::cdf(boost::math::complement(z, 8.0)) -
                       boost::math::cdf(boost::math::complement(z, 9.0));
    CHECK(normal_interval(8.0, 9.0) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(normal_interval(-1.0, 1.0) == doctest::Approx(0.6826894921370859).epsilon(1e-14));
    CHECK(normal_interval(2.0, 1.0) == 0.0);
  }

  TEST_CASE("chi-square laws with closed forms") {
    for (double t : {0.01, 0.5, 1.0, 3.0, 10.0, 40.0}) {
      CHECK(chi2_cdf(t, 2) == doctest::Approx(-std::expm1(-t / 2)).epsilon(1e-13));
      CHECK(chi2_cdf(t, 4) == doctest::Approx(1 - std::exp(-t / 2) * (1 + t / 2)).epsilon(1e-12));
      CHECK(chi2_ccdf(t, 2) == doctest::Approx(std::exp(-t / 2)).epsilon(1e-13));
      CHECK(chi2_pdf(t, 2) == doctest::Approx(0.5 * std::exp(-t / 2)).epsilon(1e-13));
      CHECK(chi2_log_pdf(t, 6) == doctest::Approx(std::log(t * t * std::exp(-t / 2) / 16)).epsilon(1e-13));
    }
    // r = 1: P(Z^2 <= t)
    CHECK(chi2_cdf(2.25, 1) == doctest::Approx(normal_interval(-1.5, 1.5)).epsilon(1e-13));
  }

  TEST_CASE("chi-square quantiles invert the cdf") {
    for (int r : {1, 2, 5, 17, 22, 40, 131}) {
      for (double q : {1e-8, 0.01, 0.5, 0.99, 1 - 1e-9}) {
        CHECK(chi2_cdf(chi2_quantile(q, r), r) == doctest::Approx(q).epsilon(1e-10));
        CHECK(chi2_ccdf(chi2_upper_quantile(q, r), r) == doctest::Approx(q).epsilon(1e-10));
      }
    }
  }
}

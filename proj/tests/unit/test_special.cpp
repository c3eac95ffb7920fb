#include <doctest.h>

#include <cmath>
#include <vector>

#include "nrmi/special.hpp"

using namespace nrmi::special;

TEST_SUITE("special") {
  TEST_CASE("exponential integral at one") {
    CHECK(std::exp(log_expint_e1(1.0)) == doctest::Approx(0.219383934395520).epsilon(1e-12));
  }

  TEST_CASE("upper gamma with negative order matches the recurrence") {
    // Γ(s, y) = (Γ(s+1, y) − y^s e^{−y}) / s
    for (double s : {-0.7, -0.5, -0.3, -0.1}) {
      for (double y : {1e-3, 0.2, 0.9, 1.5, 8.0}) {
        const double lhs = std::exp(log_upper_gamma(s, y));
        const double rhs = (std::exp(log_upper_gamma(s + 1.0, y)) - std::pow(y, s) * std::exp(-y)) / s;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
      }
    }
  }

  TEST_CASE("upper plus lower gamma gives the complete gamma") {
    for (double s : {0.2, 0.5, 0.9}) {
      for (double y : {0.05, 0.7, 2.0, 12.0}) {
        const double total = std::exp(log_upper_gamma(s, y)) + std::exp(log_lower_gamma(s, y));
        CHECK(total == doctest::Approx(std::tgamma(s)).epsilon(1e-11));
      }
    }
  }

  TEST_CASE("zeta values") {
    CHECK(riemann_zeta(2.0) == doctest::Approx(M_PI * M_PI / 6.0).epsilon(1e-12));
    CHECK(1.0 / riemann_zeta(3.0) == doctest::Approx(0.831907372580707).epsilon(1e-12));
    CHECK(1.0 / riemann_zeta(1.5) == doctest::Approx(0.382793383999427).epsilon(1e-12));
  }

  TEST_CASE("zeta tail agrees with partial summation") {
    double direct = 0.0;
    for (int k = 10; k < 2000000; ++k) direct += std::pow(k, -3.0);
    CHECK(zeta_tail(3.0, 10.0) == doctest::Approx(direct).epsilon(1e-9));
  }

  TEST_CASE("log-sum-exp handles extreme magnitudes") {
    CHECK(log_sum_exp(1000.0, 1000.0) == doctest::Approx(1000.0 + std::log(2.0)));
    const std::vector<double> xs{-1e300, 0.0, std::log(3.0)};
    CHECK(log_sum_exp(xs) == doctest::Approx(std::log(4.0)));
    CHECK(log_diff_exp(std::log(5.0), std::log(2.0)) == doctest::Approx(std::log(3.0)));
  }
}

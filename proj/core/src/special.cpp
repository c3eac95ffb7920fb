#include "nrmi/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace nrmi::special {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Modified Lentz evaluation of the Legendre continued fraction for Γ(s, y).
double log_upper_gamma_cf(double s, double y) {
  constexpr double tiny = 1e-300;
  double b = y + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return -y + s * std::log(y) + std::log(h);
}

}  // namespace

double log_upper_gamma(double s, double y) {
  if (!(y > 0.0)) throw std::invalid_argument("log_upper_gamma: y must be positive");
  if (!(s > -1.0 && s < 1.0)) throw std::invalid_argument("log_upper_gamma: order outside (-1, 1)");
  if (y >= 1.0) return log_upper_gamma_cf(s, y);
  if (s == 0.0) return std::log(boost::math::expint(1, y));
  if (s > 0.0) return std::log(std::tgamma(s) - std::exp(log_lower_gamma(s, y)));
  // s in (-1, 0): Γ(s, y) = (y^s e^{-y} - Γ(s+1, y)) / (-s), both terms positive
  // and y^s e^{-y} dominant for y < 1.
  const double upper_next = std::tgamma(s + 1.0) - std::exp(log_lower_gamma(s + 1.0, y));
  const double power_term = std::exp(s * std::log(y) - y);
  return std::log((power_term - upper_next) / (-s));
}

double log_lower_gamma(double s, double y) {
  if (!(s > 0.0)) throw std::invalid_argument("log_lower_gamma: order must be positive");
  if (y <= 0.0) return kNegInf;
  if (y < s + 1.0) {
    // Series γ(s, y) = y^s e^{-y} Σ y^k / (s (s+1) ... (s+k)).
    double term = 1.0 / s;
    double sum = term;
    for (int k = 1; k < 100000; ++k) {
      term *= y / (s + k);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return s * std::log(y) - y + std::log(sum);
  }
  return std::log(boost::math::tgamma_lower(s, y));
}

double log_expint_e1(double y) { return log_upper_gamma(0.0, y); }

double zeta_tail(double s, double k) {
  if (!(s > 1.0)) throw std::invalid_argument("non-summable");
  if (!(k >= 1.0)) throw std::invalid_argument("zeta_tail: k must be >= 1");
  // Sum explicitly up to N, then Euler-Maclaurin for Σ_{j >= N} j^{-s}.
  constexpr double kSwitch = 64.0;
  double sum = 0.0;
  double start = k;
  while (start < kSwitch) {
    sum += std::pow(start, -s);
    start += 1.0;
  }
  const double n = start;
  const double ln = std::log(n);
  double tail = std::exp((1.0 - s) * ln) / (s - 1.0) + 0.5 * std::exp(-s * ln);
  // Bernoulli corrections B_{2j}/(2j)! * s (s+1) ... (s+2j-2) N^{-s-2j+1}.
  constexpr double bernoulli_over_factorial[] = {1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0,
                                                 -1.0 / 1209600.0, 1.0 / 47900160.0};
  double rising = s;
  double power = std::exp((-s - 1.0) * ln);
  for (int j = 0; j < 5; ++j) {
    tail += bernoulli_over_factorial[j] * rising * power;
    rising *= (s + 2 * j + 1) * (s + 2 * j + 2);
    power /= n * n;
  }
  return sum + tail;
}

double riemann_zeta(double s) { return zeta_tail(s, 1.0); }

double log_sum_exp(double a, double b) noexcept {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

double log_sum_exp(std::span<const double> xs) noexcept {
  if (xs.empty()) return kNegInf;
  const double m = *std::max_element(xs.begin(), xs.end());
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

double log_diff_exp(double a, double b) noexcept {
  if (b == kNegInf) return a;
  return a + std::log(-std::expm1(b - a));
}

}  // namespace nrmi::special

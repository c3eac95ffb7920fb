#pragma once

// Reference computations used only by the tests. They deliberately avoid the
// library's closed forms and recursions: direct quadrature of the intensity,
// Bell-polynomial expansions, and explicit enumeration.

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "nrmi/intensity.hpp"
#include "nrmi/measures.hpp"
#include "nrmi/posterior.hpp"

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// log ρ(s) for the homogeneous families at unit α-mass (NGGP includes 1/Γ(1-σ)).
inline std::function<double(double)> log_rho(const nrmi::IntensitySpec& spec) {
  if (const auto* p = spec.as_nggp()) {
    const double sigma = p->sigma, theta = p->theta;
    return [=](double s) { return (-1.0 - sigma) * std::log(s) - theta * s - std::lgamma(1.0 - sigma); };
  }
  if (const auto* g = std::get_if<nrmi::Gdp>(&spec.family())) {
    const int gamma = g->gamma;
    // Σ_{j≤γ} e^{-js} = e^{-s} (1 − e^{-γs}) / (1 − e^{-s})
    return [=](double s) {
      return -s + std::log(-std::expm1(-gamma * s)) - std::log(-std::expm1(-s)) - std::log(s);
    };
  }
  const auto* e = std::get_if<nrmi::ExtendedGamma>(&spec.family());
  const double b = e->beta.value(0);
  return [=](double s) { return -b * s - std::log(s); };
}

/// ∫_0^∞ exp(h(s)) ds split at 1 (tanh-sinh near the origin, exp-sinh beyond).
inline double half_line(const std::function<double(double)>& log_h) {
  auto f = [&](double s) {
    if (!(s > 0.0)) return 0.0;
    const double v = std::exp(log_h(s));
    return std::isfinite(v) ? v : 0.0;
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  return ts.integrate(f, 0.0, 1.0) + es.integrate(f, 1.0, kInf);
}

inline double tau(const nrmi::IntensitySpec& spec, std::size_t k, double u) {
  const auto lr = log_rho(spec);
  return half_line([&](double s) { return static_cast<double>(k) * std::log(s) - u * s + lr(s); });
}

inline double psi(const nrmi::IntensitySpec& spec, double lambda, double mass) {
  const auto lr = log_rho(spec);
  return mass * half_line([&](double s) { return std::log(-std::expm1(-lambda * s)) + lr(s); });
}

inline double tail_mass(const nrmi::IntensitySpec& spec, double x, double u) {
  const auto lr = log_rho(spec);
  boost::math::quadrature::exp_sinh<double> es;
  return spec.total_mass() * es.integrate(
                                 [&](double s) {
                                   const double v = std::exp(-u * s + lr(s));
                                   return std::isfinite(v) ? v : 0.0;
                                 },
                                 x, kInf);
}

/// Complete Bell polynomial B_k(ξ_1, ..., ξ_k) by explicit set-partition
/// enumeration (restricted growth strings).
inline double bell_polynomial(const std::vector<double>& xi, std::size_t k) {
  if (k == 0) return 1.0;
  std::vector<std::size_t> rgs(k, 0);
  double total = 0.0;
  for (;;) {
    std::vector<std::size_t> sizes(k, 0);
    for (auto b : rgs) ++sizes[b];
    double term = 1.0;
    for (auto s : sizes)
      if (s > 0) term *= xi[s];
    total += term;
    // next restricted growth string
    std::size_t i = k - 1;
    for (;;) {
      std::size_t prefix_max = 0;
      for (std::size_t j = 0; j < i; ++j) prefix_max = std::max(prefix_max, rgs[j]);
      if (i > 0 && rgs[i] <= prefix_max) {
        ++rgs[i];
        for (std::size_t j = i + 1; j < k; ++j) rgs[j] = 0;
        break;
      }
      if (i == 0) return total;
      --i;
    }
  }
}

/// All set partitions of {0..n-1} as block-size lists.
inline std::vector<std::vector<std::size_t>> set_partition_block_sizes(std::size_t n) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> rgs(n, 0);
  for (;;) {
    const std::size_t blocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
    std::vector<std::size_t> sizes(blocks, 0);
    for (auto b : rgs) ++sizes[b];
    out.push_back(sizes);
    std::size_t i = n - 1;
    for (;;) {
      std::size_t prefix_max = 0;
      for (std::size_t j = 0; j < i; ++j) prefix_max = std::max(prefix_max, rgs[j]);
      if (i > 0 && rgs[i] <= prefix_max) {
        ++rgs[i];
        for (std::size_t j = i + 1; j < n; ++j) rgs[j] = 0;
        break;
      }
      if (i == 0) return out;
      --i;
    }
  }
}

/// NGGP EPPF by direct Gauss–Kronrod quadrature in u.
inline double nggp_eppf(const std::vector<std::size_t>& blocks, double a, double sigma, double theta) {
  const double n = std::accumulate(blocks.begin(), blocks.end(), 0.0);
  const double k = static_cast<double>(blocks.size());
  double log_front = k * std::log(a) - std::lgamma(n);
  for (auto b : blocks) log_front += std::lgamma(b - sigma) - std::lgamma(1.0 - sigma);
  auto f = [&](double u) {
    const double v = log_front + (n - 1.0) * std::log(u) + (k * sigma - n) * std::log(u + theta) -
                     (a / sigma) * (std::pow(u + theta, sigma) - std::pow(theta, sigma));
    const double e = std::exp(v);
    return std::isfinite(e) ? e : 0.0;
  };
  boost::math::quadrature::exp_sinh<double> es;
  return es.integrate(f, 0.0, kInf);
}

/// E[P(A)^m | X] by enumerating every composition (l_j) with Σ l_j <= m and
/// integrating in u with adaptive Gauss–Kronrod; homogeneous families only.
inline double brute_force_moment(const nrmi::IntensitySpec& spec, const nrmi::Partition& partition,
                                 const nrmi::SetDescriptor& set, std::size_t m) {
  const double n = static_cast<double>(partition.n());
  std::vector<std::size_t> inside;
  for (std::size_t j = 0; j < partition.clusters(); ++j)
    if (set.contains(partition.values()[j])) inside.push_back(partition.counts()[j]);
  const double set_mass = spec.total_mass() * set.base_mass(spec.base());

  auto log_density = [&](double u) {
    double acc = (n - 1.0) * std::log(u) - nrmi::laplace_exponent(spec, u, spec.total_mass());
    for (auto c : partition.counts()) acc += nrmi::log_tau(spec, c, u);
    return acc;
  };
  auto integrand_in_t = [&](double t, const std::function<double(double)>& h) {
    const double u = std::exp(t);
    return std::exp(log_density(u) + t) * h(u);
  };
  boost::math::quadrature::gauss_kronrod<double, 61> gk;
  auto integrate = [&](const std::function<double(double)>& h) {
    return gk.integrate([&](double t) { return integrand_in_t(t, h); }, -40.0, 40.0, 15, 1e-13);
  };
  const double z = integrate([](double) { return 1.0; });

  auto kernel = [&](double u) {
    std::vector<double> xi(m + 1, 0.0);
    for (std::size_t i = 1; i <= m; ++i) xi[i] = set_mass * nrmi::tau(spec, i, u);
    double total = 0.0;
    std::vector<std::size_t> l(inside.size(), 0);
    for (;;) {
      const std::size_t used = std::accumulate(l.begin(), l.end(), std::size_t{0});
      if (used <= m) {
        double coeff = std::tgamma(static_cast<double>(m) + 1.0) / std::tgamma(static_cast<double>(m - used) + 1.0);
        double ratio = 1.0;
        for (std::size_t j = 0; j < l.size(); ++j) {
          coeff /= std::tgamma(static_cast<double>(l[j]) + 1.0);
          ratio *= nrmi::tau(spec, inside[j] + l[j], u) / nrmi::tau(spec, inside[j], u);
        }
        total += coeff * bell_polynomial(xi, m - used) * ratio;
      }
      std::size_t pos = 0;
      while (pos < l.size() && ++l[pos] > m) l[pos++] = 0;
      if (pos == l.size()) break;
    }
    return std::pow(u, static_cast<double>(m)) * total;
  };
  return std::tgamma(n) / std::tgamma(n + static_cast<double>(m)) * integrate(kernel) / z;
}

}  // namespace oracle

#include "nrmi/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "nrmi/posterior.hpp"
#include "nrmi/quadrature.hpp"

namespace nrmi {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSigmaLo = 1e-4;
constexpr double kSigmaHi = 1.0 - 1e-4;

double sample_variance(std::span<const double> xs) {
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

Functional squared(const Functional& f) {
  if (f.indicator_of) return f;
  return Functional::custom(f.name + "^2", [g = f.eval](double x) {
    const double v = g(x);
    return v * v;
  });
}

}  // namespace

double bias_term(double sigma, std::size_t n_pi, std::size_t n, double hf, double ptilde_f) {
  if (n == 0 || n_pi > n) throw std::invalid_argument("bias_term: need 0 < n_pi <= n");
  return sigma * static_cast<double>(n_pi) / static_cast<double>(n) * (hf - ptilde_f);
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto i = static_cast<std::size_t>(std::floor(h));
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + (h - static_cast<double>(i)) * (sorted[i + 1] - sorted[i]);
}

CredibleInterval credible_interval(std::span<const double> draws, double alpha, double beta,
                                   const std::optional<BiasInputs>& correction) {
  if (draws.size() < 100) throw std::invalid_argument("insufficient draws");
  if (!(alpha >= 0.0 && alpha < beta && beta <= 1.0))
    throw std::invalid_argument("credible levels must satisfy 0 <= alpha < beta <= 1");
  std::vector<double> sorted(draws.begin(), draws.end());
  std::sort(sorted.begin(), sorted.end());
  CredibleInterval ci{};
  ci.alpha = alpha;
  ci.beta = beta;
  ci.corrected = correction.has_value();
  ci.bias = correction ? bias_term(correction->sigma, correction->n_pi, correction->n, correction->hf,
                                   correction->ptilde_f)
                       : 0.0;
  ci.lo = quantile_sorted(sorted, alpha) - ci.bias;
  ci.hi = quantile_sorted(sorted, beta) - ci.bias;
  return ci;
}

BiasInputs bias_inputs(const IntensitySpec& nggp, const Partition& partition, const Functional& f) {
  const auto* p = nggp.as_nggp();
  if (!p) throw std::invalid_argument("bias correction is defined for NGGP priors");
  double ptilde = 0.0;
  for (double y : partition.values()) ptilde += f(y);
  ptilde /= static_cast<double>(partition.clusters());
  const double hf = TrueDistribution::continuous("H", nggp.base()).expectation(f);
  return {p->sigma, partition.clusters(), partition.n(), hf, ptilde};
}

double bvm_theoretical_variance(double sigma, const TrueDistribution& truth, const ContinuousLaw& base,
                                const Functional& f) {
  const double p0f = truth.expectation(f);
  const double var_p0 = std::max(0.0, truth.expectation(squared(f)) - p0f * p0f);
  if (truth.discrete()) return var_p0;
  const auto h = TrueDistribution::continuous("H", base);
  const double hf = h.expectation(f);
  const double var_h = std::max(0.0, h.expectation(squared(f)) - hf * hf);
  return (1.0 - sigma) * var_p0 + sigma * (1.0 - sigma) * var_h + sigma * (p0f - hf) * (p0f - hf);
}

BvmCheck bvm_variance_check(const IntensitySpec& nggp, const TrueDistribution& truth, const Functional& f,
                            std::size_t n, std::size_t n_draws, Rng& rng, PosteriorRoute route) {
  const auto* p = nggp.as_nggp();
  if (!p) throw std::invalid_argument("bvm_variance_check requires an NGGP intensity");
  if (n_draws < 2) throw std::invalid_argument("insufficient draws");
  const auto sample = truth.sample(n, rng);
  const auto density = build_latent_density(nggp, partition_of(sample));
  const auto draws = sample_functional(density, f, n_draws, TruncationPolicy::for_sample_size(n), rng, route);
  return {static_cast<double>(n) * sample_variance(draws),
          bvm_theoretical_variance(p->sigma, truth, nggp.base(), f)};
}

// ---------------------------------------------------------------------------
// EPPF

double eppf_loglik(double sigma, std::span<const std::size_t> block_sizes, double a, double theta) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw std::invalid_argument("sigma must lie in (0, 1)");
  if (!(a > 0.0) || !(theta > 0.0)) throw std::invalid_argument("a and theta must be positive");
  if (block_sizes.empty()) throw std::invalid_argument("empty sample");
  std::map<std::size_t, std::size_t> sizes;
  std::size_t n_total = 0;
  for (auto b : block_sizes) {
    if (b == 0) throw std::invalid_argument("empty block");
    ++sizes[b];
    n_total += b;
  }
  const double n = static_cast<double>(n_total);
  const double k = static_cast<double>(block_sizes.size());
  double log_blocks = 0.0;
  for (const auto& [b, count] : sizes)
    log_blocks += static_cast<double>(count) * (std::lgamma(static_cast<double>(b) - sigma) - std::lgamma(1.0 - sigma));

  const double theta_s = std::pow(theta, sigma);
  auto g = [=](double t) {
    const double u = std::exp(t);
    return n * t + (k * sigma - n) * std::log(u + theta) - a / sigma * theta_s * std::expm1(sigma * std::log1p(u / theta));
  };
  auto dg = [=](double t) {
    const double u = std::exp(t);
    return n + (k * sigma - n) * u / (u + theta) - a * u * std::pow(u + theta, sigma - 1.0);
  };
  const double log_integral = quad::integrate_unimodal(g, dg, 0.0).log_integral;
  return log_blocks - std::lgamma(n) + k * std::log(a) + log_integral;
}

double eppf_loglik(double sigma, const Partition& partition, double a, double theta) {
  return eppf_loglik(sigma, std::span<const std::size_t>(partition.counts()), a, theta);
}

SigmaEstimate mle_sigma(const Partition& partition, double a, double theta) {
  if (partition.n() < 2) throw std::invalid_argument("mle_sigma needs at least two observations");
  auto f = [&](double s) { return eppf_loglik(s, partition, a, theta); };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = kSigmaLo, hi = kSigmaHi;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > 1e-6) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  SigmaEstimate est{};
  est.sigma = 0.5 * (lo + hi);
  est.loglik = f(est.sigma);
  // Compare against the endpoints themselves: golden section cannot land on them.
  for (double edge : {kSigmaLo, kSigmaHi}) {
    if (std::fabs(est.sigma - edge) < 1e-5) {
      const double fe = f(edge);
      if (fe >= est.loglik) {
        est.sigma = edge;
        est.loglik = fe;
      }
      est.at_boundary = true;
    }
  }
  return est;
}

// ---------------------------------------------------------------------------
// Number of clusters

ClusterCountPmf ncluster_pmf(const IntensitySpec& spec, std::size_t n) {
  if (n == 0) throw std::invalid_argument("ncluster_pmf: n must be positive");
  if (n > 8) throw std::invalid_argument("enumeration cap");
  const double nd = static_cast<double>(n);
  const auto whole = SetDescriptor::whole();
  ClusterCountPmf out;
  out.pmf.assign(n, 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    // [x^n] (Σ_i u^i ξ_i x^i / i!)^k summed over compositions of n into k parts.
    auto g = [&, k](double t) {
      const double u = std::exp(t);
      std::vector<double> base(n + 1, 0.0);
      double factorial = 1.0;
      for (std::size_t i = 1; i <= n; ++i) {
        factorial *= static_cast<double>(i);
        base[i] = std::exp(static_cast<double>(i) * t + log_xi(spec, i, u, whole)) / factorial;
      }
      std::vector<double> power(n + 1, 0.0);
      power[0] = 1.0;
      for (std::size_t r = 0; r < k; ++r) {
        std::vector<double> next(n + 1, 0.0);
        for (std::size_t i = 0; i <= n; ++i)
          for (std::size_t j = 1; i + j <= n; ++j) next[i + j] += power[i] * base[j];
        power = std::move(next);
      }
      if (!(power[n] > 0.0)) return -kInf;
      return std::log(nd) - std::lgamma(static_cast<double>(k) + 1.0) + std::log(power[n]) -
             laplace_exponent(spec, u, whole);
    };
    out.pmf[k - 1] = std::exp(quad::integrate_unimodal(g, 0.0).log_integral);
  }
  out.raw_total = std::accumulate(out.pmf.begin(), out.pmf.end(), 0.0);
  for (double& p : out.pmf) p /= out.raw_total;
  return out;
}

}  // namespace nrmi

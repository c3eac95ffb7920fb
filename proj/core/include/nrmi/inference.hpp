#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "nrmi/intensity.hpp"
#include "nrmi/measures.hpp"
#include "nrmi/random.hpp"
#include "nrmi/sampler.hpp"

namespace nrmi {

struct CredibleInterval {
  double lo;
  double hi;
  double alpha;
  double beta;
  bool corrected;
  double bias;
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

/// (σ n_pi / n)(Hf - P̃_n f).
double bias_term(double sigma, std::size_t n_pi, std::size_t n, double hf, double ptilde_f);

struct BiasInputs {
  double sigma;
  std::size_t n_pi;
  std::size_t n;
  double hf;
  double ptilde_f;
};

/// Type-7 sample quantile of sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

/// Equal-tailed interval from posterior draws of Pf, shifted down by the bias
/// term when `correction` is given. Needs at least 100 draws.
CredibleInterval credible_interval(std::span<const double> draws, double alpha, double beta,
                                   const std::optional<BiasInputs>& correction = std::nullopt);

/// Bias inputs for an NGGP posterior given data and the base measure.
BiasInputs bias_inputs(const IntensitySpec& nggp, const Partition& partition, const Functional& f);

struct BvmCheck {
  double empirical;
  double theoretical;
};

/// n·Var(Pf | X) over `n_draws` posterior draws from a sample of size n
/// against the limiting variance.
BvmCheck bvm_variance_check(const IntensitySpec& nggp, const TrueDistribution& truth, const Functional& f,
                            std::size_t n, std::size_t n_draws, Rng& rng,
                            PosteriorRoute route = PosteriorRoute::Auto);

/// Limiting variance of √n(Pf - E[Pf|X]).
double bvm_theoretical_variance(double sigma, const TrueDistribution& truth, const ContinuousLaw& base,
                                const Functional& f);

/// NGGP exchangeable partition log-probability of the block sizes.
double eppf_loglik(double sigma, std::span<const std::size_t> block_sizes, double a, double theta);
double eppf_loglik(double sigma, const Partition& partition, double a, double theta);

struct SigmaEstimate {
  double sigma;
  double loglik;
  bool at_boundary;
};

/// Golden-section maximization of the EPPF over [1e-4, 1 - 1e-4].
SigmaEstimate mle_sigma(const Partition& partition, double a, double theta);

struct ClusterCountPmf {
  std::vector<double> pmf;  // index k-1 holds P(n(π) = k)
  double raw_total;         // sum before normalization
};

/// Prior law of the number of clusters among n <= 8 observations.
ClusterCountPmf ncluster_pmf(const IntensitySpec& spec, std::size_t n);

}  // namespace nrmi

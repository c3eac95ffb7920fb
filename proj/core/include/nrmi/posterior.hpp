#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "nrmi/intensity.hpp"
#include "nrmi/measures.hpp"
#include "nrmi/quadrature.hpp"
#include "nrmi/random.hpp"

namespace nrmi {

/// Clusters sharing a multiplicity and a location class have identical τ
/// factors; the latent density and moments loop over these groups.
struct ClusterGroup {
  std::size_t count;
  std::size_t location_class;
  double representative;
  std::size_t size;
};

/// Posterior density of the latent variable U_n given the partition,
/// discretized on a mode-centred grid in t = log u.
class LatentDensity {
 public:
  const IntensitySpec& spec() const noexcept { return spec_; }
  const Partition& partition() const noexcept { return partition_; }

  /// (n-1) log u - ψ(u) + Σ_j log τ_{n_j}(u, Y_j).
  double log_unnorm(double u) const;
  /// d/dt of log_unnorm(e^t) + t; decreasing in t.
  double log_slope(double t) const;
  /// log ∫ exp(log_unnorm(u)) du.
  double log_norm_const() const noexcept { return grid_.log_integral; }
  /// Mode of the density of log U_n, reported on the u scale.
  double mode() const noexcept;
  const quad::LogGrid& grid() const noexcept { return grid_; }
  /// (u_i, probability mass of node i), masses summing to one.
  std::vector<std::pair<double, double>> quadrature_nodes() const;
  /// E[h(U_n) | X] on the quadrature rule.
  double expectation(const std::function<double(double)>& h) const;
  /// False when the default Assumption-A grid check failed for this spec.
  bool assumption_ok() const noexcept { return assumption_ok_; }
  const std::vector<ClusterGroup>& groups() const noexcept { return groups_; }

 private:
  friend LatentDensity build_latent_density(const IntensitySpec&, const Partition&);
  LatentDensity(IntensitySpec spec, Partition partition);

  IntensitySpec spec_;
  Partition partition_;
  std::vector<ClusterGroup> groups_;
  quad::LogGrid grid_;
  std::vector<double> cdf_;
  bool assumption_ok_ = true;

  friend double sample_latent(const LatentDensity&, Rng&);
};

/// Throws NumericalError("mode not found") if the log-slope has no sign change.
LatentDensity build_latent_density(const IntensitySpec& spec, const Partition& partition);

/// Inverse-CDF draw on the quadrature grid.
double sample_latent(const LatentDensity& density, Rng& rng);

/// V^{(k)}(u) for a set of α-mass `set_mass` (non-homogeneous families treat
/// the set as distributed like H). Throws "order too large" for k > 12.
double v_derivative(const IntensitySpec& spec, std::size_t k, double u, double set_mass);
double v_derivative(const IntensitySpec& spec, std::size_t k, double u, const SetDescriptor& set);

/// E[P(A)^m | X], m <= 4.
double posterior_moment(const LatentDensity& density, const SetDescriptor& set, std::size_t m);
double posterior_moment(const IntensitySpec& spec, const Partition& partition, const SetDescriptor& set,
                        std::size_t m);

/// E[Π_i P(A_i)^{m_i} | X] for pairwise disjoint A_i, Σ m_i <= 4.
double posterior_mixed_moment(const LatentDensity& density, const std::vector<SetDescriptor>& sets,
                              const std::vector<std::size_t>& orders);
double posterior_mixed_moment(const IntensitySpec& spec, const Partition& partition,
                              const std::vector<SetDescriptor>& sets, const std::vector<std::size_t>& orders);

struct NggpPosteriorMean {
  double weight_h;
  std::vector<double> atom_weights;
};

/// E[P | X] = weight_h·H + Σ_j atom_weights[j]·δ_{Y_j}. Requires an NGGP spec.
NggpPosteriorMean posterior_mean_nggp(const LatentDensity& density);
NggpPosteriorMean posterior_mean_nggp(const IntensitySpec& spec, const Partition& partition);

/// Cells [b_i, b_{i+1}) between consecutive boundaries plus one complement cell
/// holding everything else.
std::vector<SetDescriptor> cells_from_boundaries(const std::vector<double>& boundaries);

/// Σ_i Var[P(A_i) | X] over cells_from_boundaries(boundaries).
double consistency_diagnostic(const IntensitySpec& spec, const Partition& partition,
                              const std::vector<double>& boundaries);
double consistency_diagnostic(const LatentDensity& density, const std::vector<double>& boundaries);

/// Prior moment E[P(A)^m], m <= 4.
double prior_moment(const IntensitySpec& spec, const SetDescriptor& set, std::size_t m);
/// Σ_i Var[P(A_i)] under the prior.
double prior_consistency_diagnostic(const IntensitySpec& spec, const std::vector<double>& boundaries);

}  // namespace nrmi

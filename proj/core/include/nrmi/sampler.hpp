#pragma once

#include <cstddef>
#include <vector>

#include "nrmi/intensity.hpp"
#include "nrmi/measures.hpp"
#include "nrmi/posterior.hpp"
#include "nrmi/random.hpp"

namespace nrmi {

struct TruncationPolicy {
  enum class Mode { RelativeTail, FixedCount };

  Mode mode = Mode::RelativeTail;
  double epsilon = 0.01;
  std::size_t count = 0;

  static TruncationPolicy relative_tail(double epsilon);
  static TruncationPolicy fixed_count(std::size_t count);
  /// Relative tail with epsilon = 1/√n.
  static TruncationPolicy for_sample_size(std::size_t n);
};

/// Largest jumps of a CRM in decreasing order with their locations.
struct JumpSeries {
  std::vector<double> jumps;
  std::vector<double> locations;
  /// Expected mass of the discarded jumps, ∫_0^{J_last} s ν(ds).
  double residual_mass = 0.0;
  double retained = 0.0;
};

constexpr std::size_t kMaxJumps = 10'000'000;

/// Ferguson–Klass series for the intensity tilted by e^{-u_shift·s}.
/// Locations are drawn only when `with_locations` is set.
/// Throws NumericalError("truncation infeasible") past kMaxJumps.
JumpSeries ferguson_klass(const IntensitySpec& spec, double u_shift, const TruncationPolicy& policy, Rng& rng,
                          bool with_locations = true);
std::vector<double> ferguson_klass_jumps(const IntensitySpec& spec, double u_shift,
                                         const TruncationPolicy& policy, Rng& rng);

/// Normalized truncated prior draw; `spec` must be NGGP.
AtomicMeasure sample_nggp_prior(const IntensitySpec& spec, const TruncationPolicy& policy, Rng& rng);

struct PosteriorDraw {
  double kappa = 0.0;
  AtomicMeasure crm_part;
  AtomicMeasure fixed_part;
  double u_latent = 0.0;
  double crm_total = 0.0;
  double fixed_total = 0.0;
  double residual_mass = 0.0;

  AtomicMeasure composed() const;
  /// κ·crm_part f + (1-κ)·fixed_part f.
  double integrate(const Functional& f) const;
};

PosteriorDraw sample_posterior(const LatentDensity& density, const TruncationPolicy& policy, Rng& rng);
PosteriorDraw sample_posterior(const IntensitySpec& spec, const Partition& partition,
                               const TruncationPolicy& policy, Rng& rng);

/// Positive variable with Laplace transform exp(-(mass/σ)((c+λ)^σ - c^σ)),
/// i.e. the total mass of a generalized gamma CRM with α-mass `mass`.
double sample_tempered_stable(double mass, double sigma, double c, Rng& rng);

struct SetProbabilityDraw {
  double value;
  double kappa;
  double u_latent;
};

/// Exact posterior draws of P(A): the CRM masses of A and its complement are
/// sampled directly instead of through a truncated series.
class SetProbabilitySampler {
 public:
  SetProbabilitySampler(const LatentDensity& density, SetDescriptor set);
  SetProbabilityDraw operator()(Rng& rng) const;

 private:
  double sample_fixed(double u, bool inside, Rng& rng) const;

  const LatentDensity* density_;
  SetDescriptor set_;
  std::vector<char> inside_;
  double base_in_ = 0.0;
  std::vector<double> cell_in_;
  std::vector<double> cell_out_;
  double nggp_shape_in_ = 0.0;
  double nggp_shape_out_ = 0.0;
};

enum class PosteriorRoute { Auto, FergusonKlass, ExactSets };

/// `count` posterior draws of Pf. Auto uses exact set sampling when f is an
/// indicator and the series otherwise.
std::vector<double> sample_functional(const LatentDensity& density, const Functional& f, std::size_t count,
                                      const TruncationPolicy& policy, Rng& rng,
                                      PosteriorRoute route = PosteriorRoute::Auto);

}  // namespace nrmi

#include "nrmi/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "nrmi/error.hpp"
#include "nrmi/special.hpp"

namespace nrmi {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_samplable(const IntensitySpec& spec) {
  if (spec.is_custom()) throw std::invalid_argument("posterior sampling unsupported for custom intensities");
}

struct TailPoint {
  double y;
  double log_n;
  double slope;  // d/dy log N(e^y)
};

double tail_slope(const IntensitySpec& spec, double y, double log_n, double u_shift) {
  return -std::exp(y + log_levy_density(spec, std::exp(y), u_shift) - log_n);
}

// Solve log N(e^y) = log_target for y by safeguarded Newton. `hi` is a point
// with N below the target; `y0` is the starting guess.
TailPoint invert_tail(const IntensitySpec& spec, double u_shift, double log_target, double y0, double hi) {
  double lo = -kInf;
  double y = std::min(y0, hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double log_n = log_levy_tail_mass(spec, std::exp(y), u_shift);
    const double val = log_n - log_target;
    if (val > 0.0)
      lo = y;
    else
      hi = y;
    const double slope = tail_slope(spec, y, log_n, u_shift);
    if (val == 0.0) return {y, log_n, slope};
    double next = y - val / slope;
    if (!std::isfinite(next) || !(next > lo && next < hi)) {
      if (std::isfinite(lo) && std::isfinite(hi))
        next = 0.5 * (lo + hi);
      else if (std::isfinite(hi))
        next = hi - std::max(1.0, std::fabs(val));
      else
        next = lo + std::max(1.0, std::fabs(val));
    }
    if (std::fabs(next - y) < 1e-10 * std::max(1.0, std::fabs(y))) return {next, log_target, slope};
    y = next;
  }
  throw NumericalError("tail-mass inversion did not converge");
}

// Cheap upper bound on the expected residual mass below x.
double residual_upper_bound(const IntensitySpec& spec, double x) {
  if (const auto* p = spec.as_nggp())
    return p->a * std::exp((1.0 - p->sigma) * std::log(x) - std::lgamma(2.0 - p->sigma));
  if (spec.is_custom()) return kInf;
  // ∫_0^x s e^{-(u+b)s}/s ds <= x for every component.
  double weight = 0.0;
  for (const auto& c : spec.components()) weight += c.weight * spec.base().mass(c.cell);
  return spec.total_mass() * weight * x;
}

double sample_location(const IntensitySpec& spec, double jump, double u_shift, Rng& rng) {
  if (spec.homogeneous()) return spec.base().sample(rng);
  const auto& comps = spec.components();
  std::vector<double> logw(comps.size());
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const double mass = spec.base().mass(comps[c].cell);
    logw[c] = mass > 0.0 ? std::log(comps[c].weight * mass) - (u_shift + comps[c].rate) * jump : -kInf;
  }
  const double norm = special::log_sum_exp(std::span<const double>(logw));
  double v = uniform01(rng);
  std::size_t pick = comps.size() - 1;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    v -= std::exp(logw[c] - norm);
    if (v < 0.0) {
      pick = c;
      break;
    }
  }
  return spec.base().sample_within(comps[pick].cell, rng);
}

// Fixed-atom jump at a cluster of size `count` located at y.
double sample_fixed_jump(const IntensitySpec& spec, std::size_t count, double y, double u, Rng& rng) {
  const double nj = static_cast<double>(count);
  if (const auto* p = spec.as_nggp()) return gamma_variate(nj - p->sigma, u + p->theta, rng);
  // Mixture over active components, weights ∝ w Γ(n_j)/(u+b)^{n_j}; Gumbel-max.
  double best = -kInf;
  double rate = 0.0;
  for (const auto& comp : spec.components()) {
    if (!comp.cell.contains(y)) continue;
    const double score = std::log(comp.weight) - nj * std::log(u + comp.rate) -
                         std::log(standard_exponential(rng));
    if (score > best) {
      best = score;
      rate = u + comp.rate;
    }
  }
  if (!(rate > 0.0)) throw NumericalError("no intensity component covers an observed value");
  return gamma_variate(nj, rate, rng);
}

}  // namespace

TruncationPolicy TruncationPolicy::relative_tail(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("truncation epsilon must lie in (0, 1)");
  TruncationPolicy p;
  p.epsilon = epsilon;
  return p;
}

TruncationPolicy TruncationPolicy::fixed_count(std::size_t count) {
  if (count == 0) throw std::invalid_argument("fixed truncation count must be positive");
  TruncationPolicy p;
  p.mode = Mode::FixedCount;
  p.count = count;
  return p;
}

TruncationPolicy TruncationPolicy::for_sample_size(std::size_t n) {
  return relative_tail(1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(n, 2))));
}

JumpSeries ferguson_klass(const IntensitySpec& spec, double u_shift, const TruncationPolicy& policy, Rng& rng,
                          bool with_locations) {
  require_samplable(spec);
  JumpSeries out;
  double arrival = 0.0;
  TailPoint last{0.0, 0.0, 0.0};
  bool first = true;
  for (;;) {
    if (out.jumps.size() >= kMaxJumps) throw NumericalError("truncation infeasible");
    const double previous = arrival;
    arrival += standard_exponential(rng);
    // Warm start: one Newton step from the previous solution.
    const double guess = first ? 0.0 : last.y + (std::log(arrival) - std::log(previous)) / last.slope;
    last = invert_tail(spec, u_shift, std::log(arrival), guess, first ? kInf : last.y);
    first = false;
    const double jump = std::exp(last.y);
    out.jumps.push_back(jump);
    if (with_locations) out.locations.push_back(sample_location(spec, jump, u_shift, rng));
    out.retained += jump;
    if (policy.mode == TruncationPolicy::Mode::FixedCount) {
      if (out.jumps.size() >= policy.count) break;
    } else {
      const double target = policy.epsilon * out.retained;
      if (residual_upper_bound(spec, jump) < target || levy_residual_mass(spec, jump, u_shift) < target) break;
    }
  }
  out.residual_mass = levy_residual_mass(spec, out.jumps.back(), u_shift);
  return out;
}

std::vector<double> ferguson_klass_jumps(const IntensitySpec& spec, double u_shift,
                                         const TruncationPolicy& policy, Rng& rng) {
  return ferguson_klass(spec, u_shift, policy, rng, false).jumps;
}

AtomicMeasure sample_nggp_prior(const IntensitySpec& spec, const TruncationPolicy& policy, Rng& rng) {
  if (!spec.as_nggp()) throw std::invalid_argument("sample_nggp_prior requires an NGGP intensity");
  const auto series = ferguson_klass(spec, 0.0, policy, rng);
  std::vector<Atom> atoms(series.jumps.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) atoms[i] = {series.locations[i], series.jumps[i]};
  return AtomicMeasure::normalize(std::move(atoms));
}

// ---------------------------------------------------------------------------
// Posterior draws

AtomicMeasure PosteriorDraw::composed() const {
  std::vector<Atom> atoms;
  atoms.reserve(crm_part.size() + fixed_part.size());
  for (const auto& a : crm_part.atoms()) atoms.push_back({a.location, kappa * a.weight});
  for (const auto& a : fixed_part.atoms()) atoms.push_back({a.location, (1.0 - kappa) * a.weight});
  return AtomicMeasure(std::move(atoms), true);
}

double PosteriorDraw::integrate(const Functional& f) const {
  return kappa * nrmi::integrate(crm_part, f) + (1.0 - kappa) * nrmi::integrate(fixed_part, f);
}

PosteriorDraw sample_posterior(const LatentDensity& density, const TruncationPolicy& policy, Rng& rng) {
  const auto& spec = density.spec();
  require_samplable(spec);
  const auto& partition = density.partition();
  PosteriorDraw draw;
  draw.u_latent = sample_latent(density, rng);

  std::vector<Atom> fixed(partition.clusters());
  for (std::size_t j = 0; j < fixed.size(); ++j) {
    const double y = partition.values()[j];
    fixed[j] = {y, sample_fixed_jump(spec, partition.counts()[j], y, draw.u_latent, rng)};
    draw.fixed_total += fixed[j].weight;
  }

  const auto series = ferguson_klass(spec, draw.u_latent, policy, rng);
  std::vector<Atom> crm(series.jumps.size());
  for (std::size_t i = 0; i < crm.size(); ++i) crm[i] = {series.locations[i], series.jumps[i]};
  draw.crm_total = series.retained;
  draw.residual_mass = series.residual_mass;
  draw.kappa = draw.crm_total / (draw.crm_total + draw.fixed_total);
  draw.crm_part = AtomicMeasure::normalize(std::move(crm));
  draw.fixed_part = AtomicMeasure::normalize(std::move(fixed));
  return draw;
}

PosteriorDraw sample_posterior(const IntensitySpec& spec, const Partition& partition,
                               const TruncationPolicy& policy, Rng& rng) {
  return sample_posterior(build_latent_density(spec, partition), policy, rng);
}

// ---------------------------------------------------------------------------
// Exact set masses

double sample_tempered_stable(double mass, double sigma, double c, Rng& rng) {
  if (!(mass > 0.0)) return 0.0;
  if (!(sigma > 0.0 && sigma < 1.0) || !(c > 0.0))
    throw std::invalid_argument("tempered stable: need sigma in (0,1) and c > 0");
  // Split into pieces whose tilting acceptance rate exp(-k c^σ) is at least 1/e.
  const double load = mass / sigma * std::pow(c, sigma);
  const double pieces = std::max(1.0, std::ceil(load));
  const double k = mass / (sigma * pieces);
  const double scale = std::pow(k, 1.0 / sigma);
  const double exponent = (1.0 - sigma) / sigma;
  double total = 0.0;
  for (double i = 0; i < pieces; i += 1.0) {
    for (;;) {
      // Kanter's representation of the positive σ-stable law with E e^{-λS} = e^{-λ^σ}.
      const double v = std::numbers::pi * uniform_open01(rng);
      const double e = standard_exponential(rng);
      const double s = std::sin(sigma * v) / std::pow(std::sin(v), 1.0 / sigma) *
                       std::pow(std::sin((1.0 - sigma) * v) / e, exponent);
      const double x = scale * s;
      if (uniform01(rng) < std::exp(-c * x)) {
        total += x;
        break;
      }
    }
  }
  return total;
}

SetProbabilitySampler::SetProbabilitySampler(const LatentDensity& density, SetDescriptor set)
    : density_(&density), set_(std::move(set)) {
  const auto& spec = density.spec();
  require_samplable(spec);
  const auto& partition = density.partition();
  inside_.resize(partition.clusters());
  for (std::size_t j = 0; j < inside_.size(); ++j) inside_[j] = set_.contains(partition.values()[j]);
  const double a = spec.total_mass();
  if (const auto* p = spec.as_nggp()) {
    base_in_ = set_.base_mass(spec.base());
    for (std::size_t j = 0; j < inside_.size(); ++j) {
      const double shape = static_cast<double>(partition.counts()[j]) - p->sigma;
      (inside_[j] ? nggp_shape_in_ : nggp_shape_out_) += shape;
    }
    return;
  }
  for (const auto& comp : spec.components()) {
    const double cell = spec.base().mass(comp.cell);
    const double in = set_.base_mass_within(spec.base(), comp.cell);
    cell_in_.push_back(a * comp.weight * in);
    cell_out_.push_back(a * comp.weight * std::max(0.0, cell - in));
  }
}

double SetProbabilitySampler::sample_fixed(double u, bool inside, Rng& rng) const {
  const auto& spec = density_->spec();
  const auto& partition = density_->partition();
  double total = 0.0;
  for (std::size_t j = 0; j < inside_.size(); ++j) {
    if (static_cast<bool>(inside_[j]) != inside) continue;
    total += sample_fixed_jump(spec, partition.counts()[j], partition.values()[j], u, rng);
  }
  return total;
}

SetProbabilityDraw SetProbabilitySampler::operator()(Rng& rng) const {
  const auto& spec = density_->spec();
  const double u = sample_latent(*density_, rng);
  double crm_in = 0.0, crm_out = 0.0, fixed_in = 0.0, fixed_out = 0.0;
  if (const auto* p = spec.as_nggp()) {
    const double c = u + p->theta;
    crm_in = sample_tempered_stable(p->a * base_in_, p->sigma, c, rng);
    crm_out = sample_tempered_stable(p->a * (1.0 - base_in_), p->sigma, c, rng);
    if (nggp_shape_in_ > 0.0) fixed_in = gamma_variate(nggp_shape_in_, c, rng);
    if (nggp_shape_out_ > 0.0) fixed_out = gamma_variate(nggp_shape_out_, c, rng);
  } else {
    const auto& comps = spec.components();
    for (std::size_t i = 0; i < comps.size(); ++i) {
      if (cell_in_[i] > 0.0) crm_in += gamma_variate(cell_in_[i], u + comps[i].rate, rng);
      if (cell_out_[i] > 0.0) crm_out += gamma_variate(cell_out_[i], u + comps[i].rate, rng);
    }
    fixed_in = sample_fixed(u, true, rng);
    fixed_out = sample_fixed(u, false, rng);
  }
  const double total = crm_in + crm_out + fixed_in + fixed_out;
  return {(crm_in + fixed_in) / total, (crm_in + crm_out) / total, u};
}

std::vector<double> sample_functional(const LatentDensity& density, const Functional& f, std::size_t count,
                                      const TruncationPolicy& policy, Rng& rng, PosteriorRoute route) {
  if (route == PosteriorRoute::Auto)
    route = f.indicator_of ? PosteriorRoute::ExactSets : PosteriorRoute::FergusonKlass;
  std::vector<double> out;
  out.reserve(count);
  if (route == PosteriorRoute::ExactSets) {
    if (!f.indicator_of) throw std::invalid_argument("exact set sampling needs an indicator functional");
    const SetProbabilitySampler sampler(density, *f.indicator_of);
    for (std::size_t i = 0; i < count; ++i) out.push_back(sampler(rng).value);
  } else {
    for (std::size_t i = 0; i < count; ++i) out.push_back(sample_posterior(density, policy, rng).integrate(f));
  }
  return out;
}

}  // namespace nrmi

#include "nrmi/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "nrmi/error.hpp"
#include "nrmi/special.hpp"

namespace nrmi {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxMomentOrder = 4;
constexpr std::size_t kMaxVOrder = 12;

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

// V^{(0..k)} from ξ_1..ξ_k (xi[0] unused). Works equally for the u-scaled
// quantities u^i ξ_i, giving u^k V^{(k)}.
std::vector<double> v_recursion(const std::vector<double>& xi, std::size_t k) {
  std::vector<double> v(k + 1, 0.0);
  v[0] = 1.0;
  for (std::size_t j = 1; j <= k; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < j; ++i) acc += binomial(j - 1, i) * xi[j - i] * v[i];
    v[j] = acc;
  }
  return v;
}

// u^i ξ_i(u, A), i = 0..k.
std::vector<double> scaled_xi(const IntensitySpec& spec, std::size_t k, double u, const SetDescriptor& set) {
  std::vector<double> xi(k + 1, 0.0);
  const double log_u = std::log(u);
  for (std::size_t i = 1; i <= k; ++i) xi[i] = std::exp(static_cast<double>(i) * log_u + log_xi(spec, i, u, set));
  return xi;
}

using Poly = std::vector<double>;

Poly poly_mul(const Poly& a, const Poly& b, std::size_t degree) {
  Poly out(degree + 1, 0.0);
  for (std::size_t i = 0; i <= degree && i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; i + j <= degree && j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

Poly poly_pow(Poly base, std::size_t exponent, std::size_t degree) {
  Poly result(degree + 1, 0.0);
  result[0] = 1.0;
  while (exponent > 0) {
    if (exponent & 1u) result = poly_mul(result, base, degree);
    exponent >>= 1u;
    if (exponent > 0) base = poly_mul(base, base, degree);
  }
  return result;
}

std::vector<ClusterGroup> group_clusters(const IntensitySpec& spec, const Partition& partition,
                                         const SetDescriptor* restrict_to) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
  std::vector<ClusterGroup> groups;
  for (std::size_t j = 0; j < partition.clusters(); ++j) {
    const double y = partition.values()[j];
    if (restrict_to && !restrict_to->contains(y)) continue;
    const std::size_t cls = spec.location_class(y);
    const auto key = std::make_pair(partition.counts()[j], cls);
    auto [it, inserted] = index.try_emplace(key, groups.size());
    if (inserted)
      groups.push_back({partition.counts()[j], cls, y, 1});
    else
      ++groups[it->second].size;
  }
  return groups;
}

// One factor of the moment integrand: Σ_k m!/(m-k)! u^{m-k}V^{(m-k)}_A u^k e_k.
struct MomentCell {
  SetDescriptor set;
  std::size_t order;
  std::vector<ClusterGroup> groups;

  double scaled_kernel(const IntensitySpec& spec, double u) const {
    const std::size_t m = order;
    const auto v = v_recursion(scaled_xi(spec, m, u, set), m);
    Poly e(m + 1, 0.0);
    e[0] = 1.0;
    for (const auto& g : groups) {
      Poly factor(m + 1, 0.0);
      factor[0] = 1.0;
      double ratio_product = 1.0;
      double factorial = 1.0;
      for (std::size_t l = 1; l <= m; ++l) {
        ratio_product *= tau_ratio(spec, g.count + l - 1, u, g.representative);
        factorial *= static_cast<double>(l);
        factor[l] = ratio_product / factorial;
      }
      e = poly_mul(e, poly_pow(std::move(factor), g.size, m), m);
    }
    double falling = 1.0;  // m!/(m-k)!
    double total = 0.0;
    for (std::size_t k = 0; k <= m; ++k) {
      if (k > 0) falling *= static_cast<double>(m - k + 1);
      total += falling * v[m - k] * e[k];
    }
    return total;
  }
};

void check_moment(double value) {
  if (!(value >= -1e-6 && value <= 1.0 + 1e-6)) {
    std::ostringstream msg;
    msg << "moment formula inconsistency: value " << value;
    throw NumericalError(msg.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Latent density

LatentDensity::LatentDensity(IntensitySpec spec, Partition partition)
    : spec_(std::move(spec)), partition_(std::move(partition)) {
  groups_ = group_clusters(spec_, partition_, nullptr);
}

double LatentDensity::log_unnorm(double u) const {
  if (!(u > 0.0)) return -kInf;
  double acc = (static_cast<double>(partition_.n()) - 1.0) * std::log(u) -
               laplace_exponent(spec_, u, SetDescriptor::whole());
  for (const auto& g : groups_) acc += static_cast<double>(g.size) * log_tau(spec_, g.count, u, g.representative);
  return acc;
}

double LatentDensity::log_slope(double t) const {
  const double u = std::exp(t);
  double acc = static_cast<double>(partition_.n()) - std::exp(t + log_xi(spec_, 1, u, SetDescriptor::whole()));
  for (const auto& g : groups_) acc -= static_cast<double>(g.size) * tau_ratio(spec_, g.count, u, g.representative);
  return acc;
}

double LatentDensity::mode() const noexcept { return std::exp(grid_.t_mode); }

std::vector<std::pair<double, double>> LatentDensity::quadrature_nodes() const {
  const auto p = grid_.probabilities();
  std::vector<std::pair<double, double>> nodes(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) nodes[i] = {std::exp(grid_.t[i]), p[i]};
  return nodes;
}

double LatentDensity::expectation(const std::function<double(double)>& h) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < grid_.t.size(); ++i)
    acc += std::exp(grid_.log_weight[i] - grid_.log_integral) * h(std::exp(grid_.t[i]));
  return acc;
}

LatentDensity build_latent_density(const IntensitySpec& spec, const Partition& partition) {
  LatentDensity d(spec, partition);
  try {
    std::vector<double> probes;
    for (std::size_t j = 0; j < std::min<std::size_t>(partition.clusters(), 4); ++j)
      probes.push_back(partition.values()[j]);
    d.assumption_ok_ = [&] {
      const auto r = check_assumption_a(spec, default_u_grid(), 2, probes);
      return r.monotone_ok && r.bound_ok;
    }();
  } catch (const std::exception&) {
    d.assumption_ok_ = false;
  }
  auto g = [&d](double t) { return d.log_unnorm(std::exp(t)) + t; };
  auto dg = [&d](double t) { return d.log_slope(t); };
  d.grid_ = quad::integrate_unimodal(g, dg, 0.0);
  d.cdf_ = quad::grid_cdf(d.grid_);
  return d;
}

double sample_latent(const LatentDensity& density, Rng& rng) {
  return std::exp(quad::sample_grid(density.grid_, density.cdf_, rng));
}

// ---------------------------------------------------------------------------
// V-derivatives

double v_derivative(const IntensitySpec& spec, std::size_t k, double u, double set_mass) {
  if (k > kMaxVOrder) throw std::invalid_argument("order too large");
  if (k == 0) return 1.0;
  if (!(u > 0.0)) throw std::invalid_argument("v_derivative: u must be positive");
  std::vector<double> xi(k + 1, 0.0);
  const double scale = set_mass / spec.total_mass();
  for (std::size_t i = 1; i <= k; ++i)
    xi[i] = scale * std::exp(log_xi(spec, i, u, SetDescriptor::whole()));
  return v_recursion(xi, k)[k];
}

double v_derivative(const IntensitySpec& spec, std::size_t k, double u, const SetDescriptor& set) {
  if (k > kMaxVOrder) throw std::invalid_argument("order too large");
  if (k == 0) return 1.0;
  if (!(u > 0.0)) throw std::invalid_argument("v_derivative: u must be positive");
  std::vector<double> xi(k + 1, 0.0);
  for (std::size_t i = 1; i <= k; ++i) xi[i] = std::exp(log_xi(spec, i, u, set));
  return v_recursion(xi, k)[k];
}

// ---------------------------------------------------------------------------
// Moments

double posterior_mixed_moment(const LatentDensity& density, const std::vector<SetDescriptor>& sets,
                              const std::vector<std::size_t>& orders) {
  if (sets.size() != orders.size()) throw std::invalid_argument("one order per set required");
  if (sets.empty()) throw std::invalid_argument("at least one set required");
  std::size_t total_order = 0;
  for (auto m : orders) {
    if (m == 0) throw std::invalid_argument("moment orders must be positive");
    total_order += m;
  }
  if (total_order > kMaxMomentOrder) throw std::invalid_argument("order too large");
  for (std::size_t i = 0; i < sets.size(); ++i)
    for (std::size_t j = i + 1; j < sets.size(); ++j)
      if (!sets[i].disjoint_from(sets[j])) throw std::invalid_argument("sets not disjoint");

  const auto& spec = density.spec();
  const auto& partition = density.partition();
  std::vector<MomentCell> cells;
  for (std::size_t i = 0; i < sets.size(); ++i)
    cells.push_back({sets[i], orders[i], group_clusters(spec, partition, &sets[i])});

  const double n = static_cast<double>(partition.n());
  const double log_prefactor = std::lgamma(n) - std::lgamma(n + static_cast<double>(total_order));
  const auto& grid = density.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.t.size(); ++i) {
    const double w = std::exp(grid.log_weight[i] - grid.log_integral);
    if (w == 0.0) continue;
    const double u = std::exp(grid.t[i]);
    double product = 1.0;
    for (const auto& cell : cells) product *= cell.scaled_kernel(spec, u);
    acc += w * product;
  }
  const double value = std::exp(log_prefactor) * acc;
  check_moment(value);
  return value;
}

double posterior_mixed_moment(const IntensitySpec& spec, const Partition& partition,
                              const std::vector<SetDescriptor>& sets, const std::vector<std::size_t>& orders) {
  return posterior_mixed_moment(build_latent_density(spec, partition), sets, orders);
}

double posterior_moment(const LatentDensity& density, const SetDescriptor& set, std::size_t m) {
  if (m == 0) return 1.0;
  return posterior_mixed_moment(density, {set}, {m});
}

double posterior_moment(const IntensitySpec& spec, const Partition& partition, const SetDescriptor& set,
                        std::size_t m) {
  return posterior_moment(build_latent_density(spec, partition), set, m);
}

NggpPosteriorMean posterior_mean_nggp(const LatentDensity& density) {
  const auto* p = density.spec().as_nggp();
  if (!p) throw std::invalid_argument("posterior_mean_nggp requires an NGGP intensity");
  const double n = static_cast<double>(density.partition().n());
  NggpPosteriorMean out;
  out.weight_h = p->a / n * density.expectation([&](double u) {
    return u * std::pow(u + p->theta, p->sigma - 1.0);
  });
  const double atom_factor = density.expectation([&](double u) { return u / (u + p->theta); }) / n;
  for (auto c : density.partition().counts())
    out.atom_weights.push_back((static_cast<double>(c) - p->sigma) * atom_factor);
  return out;
}

NggpPosteriorMean posterior_mean_nggp(const IntensitySpec& spec, const Partition& partition) {
  return posterior_mean_nggp(build_latent_density(spec, partition));
}

// ---------------------------------------------------------------------------
// Consistency diagnostics

std::vector<SetDescriptor> cells_from_boundaries(const std::vector<double>& boundaries) {
  if (!std::is_sorted(boundaries.begin(), boundaries.end()) ||
      std::adjacent_find(boundaries.begin(), boundaries.end()) != boundaries.end())
    throw std::invalid_argument("cell boundaries must be strictly increasing");
  std::vector<SetDescriptor> cells;
  for (std::size_t i = 1; i < boundaries.size(); ++i)
    cells.push_back(SetDescriptor::interval(boundaries[i - 1], boundaries[i]));
  if (boundaries.empty())
    cells.push_back(SetDescriptor::whole());
  else
    cells.push_back(SetDescriptor::union_of({{-kInf, boundaries.front()}, {boundaries.back(), kInf}}));
  return cells;
}

double consistency_diagnostic(const LatentDensity& density, const std::vector<double>& boundaries) {
  double total = 0.0;
  for (const auto& cell : cells_from_boundaries(boundaries)) {
    const double m1 = posterior_moment(density, cell, 1);
    const double m2 = posterior_moment(density, cell, 2);
    total += std::max(0.0, m2 - m1 * m1);
  }
  return total;
}

double consistency_diagnostic(const IntensitySpec& spec, const Partition& partition,
                              const std::vector<double>& boundaries) {
  return consistency_diagnostic(build_latent_density(spec, partition), boundaries);
}

double prior_moment(const IntensitySpec& spec, const SetDescriptor& set, std::size_t m) {
  if (m == 0) return 1.0;
  if (m > kMaxMomentOrder) throw std::invalid_argument("order too large");
  if (std::isinf(log_xi(spec, 1, 1.0, set))) return 0.0;
  // (1/Γ(m)) ∫ u^m V^{(m)}_A(u) e^{-ψ(u)} d(log u).
  auto g = [&](double t) {
    const double u = std::exp(t);
    const double v = v_recursion(scaled_xi(spec, m, u, set), m)[m];
    if (!(v > 0.0)) return -kInf;
    return std::log(v) - laplace_exponent(spec, u, SetDescriptor::whole());
  };
  const auto grid = quad::integrate_unimodal(g, 0.0);
  const double value = std::exp(grid.log_integral - std::lgamma(static_cast<double>(m)));
  check_moment(value);
  return value;
}

double prior_consistency_diagnostic(const IntensitySpec& spec, const std::vector<double>& boundaries) {
  double total = 0.0;
  for (const auto& cell : cells_from_boundaries(boundaries)) {
    const double m1 = prior_moment(spec, cell, 1);
    const double m2 = prior_moment(spec, cell, 2);
    total += std::max(0.0, m2 - m1 * m1);
  }
  return total;
}

}  // namespace nrmi

#include "nrmi/intensity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "nrmi/quadrature.hpp"
#include "nrmi/special.hpp"

namespace nrmi {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
}

// log ∫_0^∞ s^{p-1} e^{-u s} ρ(s) ds for a custom ρ, integrated in v = log s.
double custom_log_moment(const CustomIntensity& c, double p, double u) {
  auto g = [&](double v) { return p * v - u * std::exp(v) + c.log_rho(std::exp(v)); };
  const double hint = u > 0.0 ? std::log(std::max(p, 0.5) / u) : 0.0;
  return quad::integrate_unimodal(g, hint).log_integral;
}

}  // namespace

// ---------------------------------------------------------------------------
// BetaTable

BetaTable::BetaTable(std::vector<double> breaks, std::vector<double> values)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
  if (values_.size() != breaks_.size() + 1)
    throw std::invalid_argument("beta table needs one more value than breaks");
  if (!std::is_sorted(breaks_.begin(), breaks_.end()) ||
      std::adjacent_find(breaks_.begin(), breaks_.end()) != breaks_.end())
    throw std::invalid_argument("beta table breaks must be strictly increasing");
  for (double v : values_) require_positive(v, "beta");
}

BetaTable BetaTable::constant(double value) { return BetaTable({}, {value}); }

BetaTable BetaTable::from_function(const std::function<double(double)>& fn, std::vector<double> breaks) {
  std::vector<double> values;
  if (breaks.empty()) {
    values.push_back(fn(0.0));
  } else {
    values.push_back(fn(breaks.front()));
    for (std::size_t i = 1; i < breaks.size(); ++i) values.push_back(fn(0.5 * (breaks[i - 1] + breaks[i])));
    values.push_back(fn(breaks.back()));
  }
  return BetaTable(std::move(breaks), std::move(values));
}

std::size_t BetaTable::cell_of(double x) const noexcept {
  return static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin());
}

double BetaTable::operator()(double x) const noexcept { return values_[cell_of(x)]; }

Interval BetaTable::cell(std::size_t i) const noexcept {
  const double lo = i == 0 ? -kInf : breaks_[i - 1];
  const double hi = i == breaks_.size() ? kInf : breaks_[i];
  return Interval{lo, hi};
}

// ---------------------------------------------------------------------------
// IntensitySpec

IntensitySpec::IntensitySpec(Family family, ContinuousLaw base, double a)
    : family_(std::move(family)), base_(std::move(base)), a_(a) {
  const Interval whole{-kInf, kInf};
  if (const auto* g = std::get_if<Gdp>(&family_)) {
    for (int j = 1; j <= g->gamma; ++j) components_.push_back({static_cast<double>(j), 1.0, whole});
  } else if (const auto* e = std::get_if<ExtendedGamma>(&family_)) {
    for (std::size_t c = 0; c < e->beta.cells(); ++c)
      components_.push_back({e->beta.value(c), 1.0, e->beta.cell(c)});
  } else if (const auto* ge = std::get_if<GeneralizedExtendedGamma>(&family_)) {
    for (const auto& table : ge->betas)
      for (std::size_t c = 0; c < table.cells(); ++c)
        components_.push_back({table.value(c), 1.0, table.cell(c)});
  }
}

IntensitySpec IntensitySpec::nggp(double a, double sigma, double theta, ContinuousLaw base) {
  require_positive(a, "a");
  require_positive(theta, "theta");
  if (!(sigma > 0.0 && sigma < 1.0)) throw std::invalid_argument("sigma must lie in (0, 1)");
  return IntensitySpec(Nggp{a, sigma, theta}, std::move(base), a);
}

IntensitySpec IntensitySpec::gdp(double a, int gamma, ContinuousLaw base) {
  require_positive(a, "a");
  if (gamma < 1) throw std::invalid_argument("gamma must be at least 1");
  return IntensitySpec(Gdp{a, gamma}, std::move(base), a);
}

IntensitySpec IntensitySpec::extended_gamma(double a, BetaTable beta, ContinuousLaw base) {
  require_positive(a, "a");
  return IntensitySpec(ExtendedGamma{a, std::move(beta)}, std::move(base), a);
}

IntensitySpec IntensitySpec::generalized_extended_gamma(double a, std::vector<BetaTable> betas,
                                                        ContinuousLaw base) {
  require_positive(a, "a");
  if (betas.empty()) throw std::invalid_argument("at least one beta table required");
  return IntensitySpec(GeneralizedExtendedGamma{a, std::move(betas)}, std::move(base), a);
}

IntensitySpec IntensitySpec::custom(double a, std::string name, std::function<double(double)> log_rho,
                                    ContinuousLaw base) {
  require_positive(a, "a");
  if (!log_rho) throw std::invalid_argument("custom intensity needs log rho");
  return IntensitySpec(CustomIntensity{a, std::move(name), std::move(log_rho)}, std::move(base), a);
}

std::string IntensitySpec::name() const {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](const Nggp& p) { out << "nggp(a=" << p.a << ",sigma=" << p.sigma << ",theta=" << p.theta << ")"; },
                 [&](const Gdp& p) { out << "gdp(a=" << p.a << ",gamma=" << p.gamma << ")"; },
                 [&](const ExtendedGamma& p) { out << "extended-gamma(a=" << p.a << ",cells=" << p.beta.cells() << ")"; },
                 [&](const GeneralizedExtendedGamma& p) {
                   out << "generalized-extended-gamma(a=" << p.a << ",tables=" << p.betas.size() << ")";
                 },
                 [&](const CustomIntensity& p) { out << "custom:" << p.name << "(a=" << p.a << ")"; },
             },
             family_);
  return out.str();
}

bool IntensitySpec::homogeneous() const noexcept {
  return std::all_of(components_.begin(), components_.end(), [](const GammaComponent& c) {
    return c.cell.lo == -kInf && c.cell.hi == kInf;
  });
}

std::size_t IntensitySpec::location_class(double x) const {
  if (const auto* e = std::get_if<ExtendedGamma>(&family_)) return e->beta.cell_of(x);
  if (const auto* ge = std::get_if<GeneralizedExtendedGamma>(&family_)) {
    std::size_t id = 0;
    std::size_t radix = 1;
    for (const auto& table : ge->betas) {
      id += radix * table.cell_of(x);
      radix *= table.cells();
    }
    return id;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// τ_k and relatives

double log_tau(const IntensitySpec& spec, std::size_t k, double u, double x) {
  if (k == 0) throw std::invalid_argument("divergent tau");
  if (!(u >= 0.0)) throw std::invalid_argument("tau: u must be nonnegative");
  const double kd = static_cast<double>(k);
  if (const auto* p = spec.as_nggp()) {
    return std::lgamma(kd - p->sigma) - std::lgamma(1.0 - p->sigma) - (kd - p->sigma) * std::log(u + p->theta);
  }
  if (const auto* c = std::get_if<CustomIntensity>(&spec.family())) return custom_log_moment(*c, kd + 1.0, u);
  const double lg = std::lgamma(kd);
  double acc = kNegInf;
  for (const auto& comp : spec.components()) {
    if (!comp.cell.contains(x)) continue;
    acc = special::log_sum_exp(acc, std::log(comp.weight) + lg - kd * std::log(u + comp.rate));
  }
  return acc;
}

double tau(const IntensitySpec& spec, std::size_t k, double u, double x) {
  return std::exp(log_tau(spec, k, u, x));
}

double tau_ratio(const IntensitySpec& spec, std::size_t k, double u, double x) {
  if (k == 0) throw std::invalid_argument("divergent tau");
  if (u == 0.0) return 0.0;
  const double kd = static_cast<double>(k);
  if (const auto* p = spec.as_nggp()) return u * (kd - p->sigma) / (u + p->theta);
  if (spec.components().size() == 1) return u * kd / (u + spec.components().front().rate);
  if (!spec.is_custom()) {
    // Weighted average of u k/(u+b) with weights ∝ w (u+b)^{-k}.
    double log_norm = kNegInf;
    std::vector<std::pair<double, double>> terms;
    for (const auto& comp : spec.components()) {
      if (!comp.cell.contains(x)) continue;
      const double lw = std::log(comp.weight) - kd * std::log(u + comp.rate);
      terms.emplace_back(lw, u * kd / (u + comp.rate));
      log_norm = special::log_sum_exp(log_norm, lw);
    }
    double ratio = 0.0;
    for (const auto& [lw, r] : terms) ratio += std::exp(lw - log_norm) * r;
    return ratio;
  }
  return u * std::exp(log_tau(spec, k + 1, u, x) - log_tau(spec, k, u, x));
}

double log_xi(const IntensitySpec& spec, std::size_t k, double u, const SetDescriptor& set) {
  if (k == 0) throw std::invalid_argument("divergent tau");
  if (spec.as_nggp() || spec.is_custom()) {
    const double mass = set.base_mass(spec.base());
    if (!(mass > 0.0)) return kNegInf;
    return std::log(spec.total_mass() * mass) + log_tau(spec, k, u);
  }
  const double kd = static_cast<double>(k);
  const double lg = std::lgamma(kd);
  double acc = kNegInf;
  for (const auto& comp : spec.components()) {
    const double mass = set.base_mass_within(spec.base(), comp.cell);
    if (!(mass > 0.0)) continue;
    acc = special::log_sum_exp(acc, std::log(spec.total_mass() * comp.weight * mass) + lg -
                                        kd * std::log(u + comp.rate));
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Laplace exponent

namespace {

double gamma_mixture_psi(const IntensitySpec& spec, double lambda,
                         const std::function<double(const Interval&)>& cell_mass) {
  double acc = 0.0;
  for (const auto& comp : spec.components())
    acc += comp.weight * cell_mass(comp.cell) * std::log1p(lambda / comp.rate);
  return acc;
}

double custom_psi_unit(const CustomIntensity& c, double lambda) {
  auto g = [&](double v) {
    const double s = std::exp(v);
    return std::log(-std::expm1(-lambda * s)) + v + c.log_rho(s);
  };
  return std::exp(quad::integrate_unimodal(g, -std::log(lambda)).log_integral);
}

}  // namespace

double laplace_exponent(const IntensitySpec& spec, double lambda, double set_mass) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("laplace_exponent: lambda must be nonnegative");
  if (!(set_mass >= 0.0)) throw std::invalid_argument("laplace_exponent: set mass must be nonnegative");
  if (lambda == 0.0 || set_mass == 0.0) return 0.0;
  if (const auto* p = spec.as_nggp()) {
    return set_mass / p->sigma * std::pow(p->theta, p->sigma) *
           std::expm1(p->sigma * std::log1p(lambda / p->theta));
  }
  if (const auto* c = std::get_if<CustomIntensity>(&spec.family())) return set_mass * custom_psi_unit(*c, lambda);
  return set_mass * gamma_mixture_psi(spec, lambda, [&](const Interval& cell) { return spec.base().mass(cell); });
}

double laplace_exponent(const IntensitySpec& spec, double lambda, const SetDescriptor& set) {
  if (spec.as_nggp() || spec.is_custom())
    return laplace_exponent(spec, lambda, spec.total_mass() * set.base_mass(spec.base()));
  if (!(lambda >= 0.0)) throw std::invalid_argument("laplace_exponent: lambda must be nonnegative");
  return spec.total_mass() * gamma_mixture_psi(spec, lambda, [&](const Interval& cell) {
           return set.base_mass_within(spec.base(), cell);
         });
}

// ---------------------------------------------------------------------------
// Tail masses

double log_levy_tail_mass(const IntensitySpec& spec, double x_cut, double u_shift) {
  if (!(x_cut > 0.0)) throw std::invalid_argument("levy_tail_mass: x_cut must be positive");
  if (!(u_shift >= 0.0)) throw std::invalid_argument("levy_tail_mass: shift must be nonnegative");
  const double log_a = std::log(spec.total_mass());
  if (const auto* p = spec.as_nggp()) {
    const double c = p->theta + u_shift;
    return log_a - std::lgamma(1.0 - p->sigma) + p->sigma * std::log(c) +
           special::log_upper_gamma(-p->sigma, c * x_cut);
  }
  if (const auto* cu = std::get_if<CustomIntensity>(&spec.family())) {
    boost::math::quadrature::exp_sinh<double> integrator;
    return log_a + std::log(integrator.integrate(
                       [&](double s) { return std::exp(cu->log_rho(s) - u_shift * s); }, x_cut, kInf));
  }
  double acc = kNegInf;
  for (const auto& comp : spec.components()) {
    const double mass = spec.base().mass(comp.cell);
    if (mass > 0.0)
      acc = special::log_sum_exp(acc, std::log(comp.weight * mass) +
                                          special::log_expint_e1((u_shift + comp.rate) * x_cut));
  }
  return log_a + acc;
}

double levy_tail_mass(const IntensitySpec& spec, double x_cut, double u_shift) {
  return std::exp(log_levy_tail_mass(spec, x_cut, u_shift));
}

double levy_residual_mass(const IntensitySpec& spec, double x_cut, double u_shift) {
  if (!(x_cut > 0.0)) return 0.0;
  const double a = spec.total_mass();
  if (const auto* p = spec.as_nggp()) {
    const double c = p->theta + u_shift;
    return std::exp(std::log(a) - std::lgamma(1.0 - p->sigma) + (p->sigma - 1.0) * std::log(c) +
                    special::log_lower_gamma(1.0 - p->sigma, c * x_cut));
  }
  if (const auto* cu = std::get_if<CustomIntensity>(&spec.family())) {
    boost::math::quadrature::tanh_sinh<double> integrator;
    return a * integrator.integrate(
                   [&](double s) { return s > 0.0 ? std::exp(std::log(s) + cu->log_rho(s) - u_shift * s) : 0.0; },
                   0.0, x_cut);
  }
  double acc = 0.0;
  for (const auto& comp : spec.components()) {
    const double r = u_shift + comp.rate;
    acc += comp.weight * spec.base().mass(comp.cell) * -std::expm1(-r * x_cut) / r;
  }
  return a * acc;
}

double levy_expected_total(const IntensitySpec& spec, double u_shift) {
  const double a = spec.total_mass();
  if (const auto* p = spec.as_nggp()) return a * std::pow(p->theta + u_shift, p->sigma - 1.0);
  if (const auto* cu = std::get_if<CustomIntensity>(&spec.family()))
    return a * std::exp(custom_log_moment(*cu, 2.0, u_shift));
  double acc = 0.0;
  for (const auto& comp : spec.components())
    acc += comp.weight * spec.base().mass(comp.cell) / (u_shift + comp.rate);
  return a * acc;
}

double log_levy_density(const IntensitySpec& spec, double s, double u_shift) {
  const double a = spec.total_mass();
  if (const auto* p = spec.as_nggp()) {
    return std::log(a) - std::lgamma(1.0 - p->sigma) - (1.0 + p->sigma) * std::log(s) -
           (p->theta + u_shift) * s;
  }
  if (const auto* cu = std::get_if<CustomIntensity>(&spec.family()))
    return std::log(a) + cu->log_rho(s) - u_shift * s;
  double acc = kNegInf;
  for (const auto& comp : spec.components()) {
    const double mass = spec.base().mass(comp.cell);
    if (mass > 0.0)
      acc = special::log_sum_exp(acc, std::log(comp.weight * mass) - (u_shift + comp.rate) * s);
  }
  return std::log(a) + acc - std::log(s);
}

// ---------------------------------------------------------------------------
// Assumption A

std::vector<double> default_u_grid() {
  std::vector<double> grid(36);
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = std::pow(10.0, -3.0 + 7.0 * static_cast<double>(i) / (grid.size() - 1.0));
  return grid;
}

AssumptionReport check_assumption_a(const IntensitySpec& spec, const std::vector<double>& u_grid,
                                    std::size_t k_max, const std::vector<double>& x_probe) {
  if (u_grid.size() < 10) throw std::invalid_argument("u grid needs at least 10 points");
  if (!(u_grid.front() > 0.0) || !std::is_sorted(u_grid.begin(), u_grid.end()) ||
      std::adjacent_find(u_grid.begin(), u_grid.end()) != u_grid.end())
    throw std::invalid_argument("u grid must be increasing and positive");
  if (u_grid.back() / u_grid.front() < 1e4) throw std::invalid_argument("u grid must span 4 decades");
  if (k_max < 2) throw std::invalid_argument("k_max must be at least 2");

  AssumptionReport report;
  report.u_grid = u_grid;
  report.k_max = k_max;
  report.x_probe = x_probe.empty() ? std::vector<double>{0.0} : x_probe;

  for (std::size_t k = 1; k <= k_max; ++k) {
    const double kd = static_cast<double>(k);
    for (double x : report.x_probe) {
      double previous = -kInf;
      double last = 0.0;
      for (double u : u_grid) {
        const double r = tau_ratio(spec, k, u, x);
        // Quadrature-based ratios carry ~1e-12 relative noise.
        if (r < previous - 1e-9 * std::max(1.0, std::fabs(previous))) {
          report.monotone_ok = false;
          report.violations.push_back({"monotone", k, x, u, r});
        }
        if (!(r < kd)) {
          report.bound_ok = false;
          report.violations.push_back({"bound", k, x, u, r});
        }
        previous = r;
        last = r;
      }
      report.c_estimates.push_back({k, x, kd - last});
    }
  }
  return report;
}

}  // namespace nrmi

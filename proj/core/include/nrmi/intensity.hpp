#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "nrmi/measures.hpp"

namespace nrmi {

/// Piecewise-constant positive function on the real line. Cell i is
/// [breaks[i-1], breaks[i]) with breaks[-1] = -inf and breaks[size] = +inf.
class BetaTable {
 public:
  BetaTable(std::vector<double> breaks, std::vector<double> values);
  static BetaTable constant(double value);
  /// Samples `fn` at cell midpoints; unbounded outer cells use their finite edge.
  static BetaTable from_function(const std::function<double(double)>& fn, std::vector<double> breaks);

  double operator()(double x) const noexcept;
  std::size_t cell_of(double x) const noexcept;
  std::size_t cells() const noexcept { return values_.size(); }
  Interval cell(std::size_t i) const noexcept;
  double value(std::size_t i) const noexcept { return values_[i]; }

 private:
  std::vector<double> breaks_;
  std::vector<double> values_;
};

struct Nggp {
  double a;
  double sigma;
  double theta;
};

struct Gdp {
  double a;
  int gamma;
};

struct ExtendedGamma {
  double a;
  BetaTable beta;
};

struct GeneralizedExtendedGamma {
  double a;
  std::vector<BetaTable> betas;
};

/// Homogeneous intensity a·ρ(s)·H(dx) with ρ given through log ρ. τ_k, ψ and
/// tail masses are evaluated by quadrature; posterior sampling is unsupported.
struct CustomIntensity {
  double a;
  std::string name;
  std::function<double(double)> log_rho;
};

/// One term b ↦ w·e^{-(u+b)s}/s restricted to `cell`; the gamma-type families
/// are finite sums of these.
struct GammaComponent {
  double rate;
  double weight;
  Interval cell;
};

class IntensitySpec {
 public:
  using Family = std::variant<Nggp, Gdp, ExtendedGamma, GeneralizedExtendedGamma, CustomIntensity>;

  static IntensitySpec nggp(double a, double sigma, double theta,
                            ContinuousLaw base = ContinuousLaw::standard_normal());
  static IntensitySpec gdp(double a, int gamma, ContinuousLaw base = ContinuousLaw::standard_normal());
  static IntensitySpec extended_gamma(double a, BetaTable beta,
                                      ContinuousLaw base = ContinuousLaw::standard_normal());
  static IntensitySpec generalized_extended_gamma(
      double a, std::vector<BetaTable> betas, ContinuousLaw base = ContinuousLaw::standard_normal());
  static IntensitySpec custom(double a, std::string name, std::function<double(double)> log_rho,
                              ContinuousLaw base = ContinuousLaw::standard_normal());

  const Family& family() const noexcept { return family_; }
  const ContinuousLaw& base() const noexcept { return base_; }
  double total_mass() const noexcept { return a_; }
  std::string name() const;

  const Nggp* as_nggp() const noexcept { return std::get_if<Nggp>(&family_); }
  bool is_custom() const noexcept { return std::holds_alternative<CustomIntensity>(family_); }
  /// True when ρ(ds|x) does not depend on x.
  bool homogeneous() const noexcept;
  /// Gamma-type decomposition; empty for NGGP and custom intensities.
  const std::vector<GammaComponent>& components() const noexcept { return components_; }
  /// Index identifying which components are active at x (equal for x, y iff
  /// ρ(·|x) = ρ(·|y)).
  std::size_t location_class(double x) const;

 private:
  IntensitySpec(Family family, ContinuousLaw base, double a);

  Family family_;
  ContinuousLaw base_;
  double a_;
  std::vector<GammaComponent> components_;
};

/// log τ_k(u, x). Throws "divergent tau" for k = 0.
double log_tau(const IntensitySpec& spec, std::size_t k, double u, double x = 0.0);
double tau(const IntensitySpec& spec, std::size_t k, double u, double x = 0.0);
/// u·τ_{k+1}(u, x)/τ_k(u, x).
double tau_ratio(const IntensitySpec& spec, std::size_t k, double u, double x = 0.0);

/// log ξ_k(u, A) = log ∫_A τ_k(u, x) α(dx); -inf when α(A) = 0.
double log_xi(const IntensitySpec& spec, std::size_t k, double u, const SetDescriptor& set);

/// ψ_B(λ) where α(B) = set_mass. For non-homogeneous families B is taken to be
/// distributed proportionally to H.
double laplace_exponent(const IntensitySpec& spec, double lambda, double set_mass);
double laplace_exponent(const IntensitySpec& spec, double lambda, const SetDescriptor& set);

/// N(x) = ∫_x^∞ ∫ e^{-u s} ρ(ds|y) α(dy).
double levy_tail_mass(const IntensitySpec& spec, double x_cut, double u_shift);
double log_levy_tail_mass(const IntensitySpec& spec, double x_cut, double u_shift);
/// ∫_0^x ∫ s e^{-u s} ρ(ds|y) α(dy): expected mass of jumps below x.
double levy_residual_mass(const IntensitySpec& spec, double x_cut, double u_shift);
/// ∫ s e^{-u s} ν(ds, dy), the mean total mass of the shifted CRM.
double levy_expected_total(const IntensitySpec& spec, double u_shift);
/// log of the s-density ∫ e^{-u s} ρ(s|y) α(dy) (so dN/dx = -exp(this)).
double log_levy_density(const IntensitySpec& spec, double s, double u_shift);

struct AssumptionReport {
  struct Estimate {
    std::size_t k;
    double x;
    /// k - tau_ratio at the largest grid point. Outside [0, 1) when the bound fails.
    double c;
  };
  struct Violation {
    std::string kind;  // "monotone" or "bound"
    std::size_t k;
    double x;
    double u;
    double ratio;
  };
  bool monotone_ok = true;
  bool bound_ok = true;
  std::vector<Estimate> c_estimates;
  std::vector<Violation> violations;
  std::vector<double> u_grid;
  std::size_t k_max = 0;
  std::vector<double> x_probe;
};

/// 36 log-spaced points on [1e-3, 1e4].
std::vector<double> default_u_grid();

/// Grid check that u ↦ tau_ratio(k, u, x) is nondecreasing and below k.
/// Throws std::invalid_argument if the grid has fewer than 10 points, spans
/// fewer than 4 decades, or k_max < 2.
AssumptionReport check_assumption_a(const IntensitySpec& spec, const std::vector<double>& u_grid,
                                    std::size_t k_max, const std::vector<double>& x_probe);

}  // namespace nrmi

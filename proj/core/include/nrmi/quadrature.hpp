#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "nrmi/random.hpp"

namespace nrmi::quad {

using LogIntegrand = std::function<double(double)>;

/// Trapezoid rule for ∫ exp(g(t)) dt on a uniform grid centred at the mode of g.
///
/// `log_weight[i]` already includes log(step), so Σ exp(log_weight) ≈ ∫ e^g.
struct LogGrid {
  std::vector<double> t;
  std::vector<double> log_weight;
  double log_integral = 0.0;
  double t_mode = 0.0;
  double g_mode = 0.0;
  double step = 0.0;

  /// exp(log_weight - log_integral): normalized node probabilities.
  std::vector<double> probabilities() const;
};

struct GridOptions {
  double drop_nats = 40.0;
  double rel_tol = 1e-12;
  std::size_t max_nodes = 1'000'000;
  double mode_tol = 1e-10;
};

/// Root of a decreasing function, bracketed by expanding outward from `hint`.
/// Throws NumericalError("mode not found") if no sign change exists in
/// [-700, 700].
double decreasing_root(const std::function<double(double)>& dg, double hint, double tol = 1e-10);

/// Integrate exp(g) with g unimodal; `dg` is its (decreasing) derivative.
LogGrid integrate_unimodal(const LogIntegrand& g, const std::function<double(double)>& dg,
                           double hint, const GridOptions& options = {});

/// As above with a central-difference derivative.
LogGrid integrate_unimodal(const LogIntegrand& g, double hint, const GridOptions& options = {});

/// Inverse-CDF draw of t from the normalized grid, interpolating the CDF
/// linearly between nodes.
double sample_grid(const LogGrid& grid, const std::vector<double>& cdf, Rng& rng);

/// Cumulative node probabilities with cdf.front() = 0 and cdf.back() = 1,
/// trapezoid-consistent (each segment carries half of each endpoint's weight).
std::vector<double> grid_cdf(const LogGrid& grid);

}  // namespace nrmi::quad

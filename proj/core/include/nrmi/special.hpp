#pragma once

#include <span>

namespace nrmi::special {

/// log Γ(s, y) for s in (-1, 1), y > 0. Negative orders are obtained from the
/// recurrence Γ(s, y) = (Γ(s + 1, y) - y^s e^{-y}) / s for small y and from the
/// Legendre continued fraction otherwise.
double log_upper_gamma(double s, double y);

/// log γ(s, y) (lower incomplete gamma) for s > 0, y >= 0.
double log_lower_gamma(double s, double y);

/// log E1(y) = log Γ(0, y).
double log_expint_e1(double y);

/// Hurwitz tail Σ_{j >= k} j^{-s} for s > 1, k >= 1 (Euler-Maclaurin to ~1e-15 relative).
double zeta_tail(double s, double k);

/// Riemann ζ(s) for s > 1.
double riemann_zeta(double s);

double log_sum_exp(double a, double b) noexcept;
double log_sum_exp(std::span<const double> xs) noexcept;

/// log(e^a - e^b) for a >= b.
double log_diff_exp(double a, double b) noexcept;

}  // namespace nrmi::special

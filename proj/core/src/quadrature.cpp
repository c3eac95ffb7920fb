#include "nrmi/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "nrmi/error.hpp"
#include "nrmi/special.hpp"

namespace nrmi::quad {
namespace {

constexpr double kLimit = 700.0;

struct Sweep {
  std::vector<double> t;
  std::vector<double> g;
};

// Nodes mode + i*h for i in [lo, hi], extended until g drops `drop` below g_mode.
Sweep sweep(const LogIntegrand& g, double t_mode, double g_mode, double h, const GridOptions& o) {
  std::vector<double> left_t, left_g, right_t, right_g;
  const double floor = g_mode - o.drop_nats;
  for (int dir : {-1, 1}) {
    auto& ts = dir < 0 ? left_t : right_t;
    auto& gs = dir < 0 ? left_g : right_g;
    for (std::size_t i = 1;; ++i) {
      const double t = t_mode + dir * static_cast<double>(i) * h;
      const double v = (std::fabs(t) > kLimit) ? -std::numeric_limits<double>::infinity() : g(t);
      if (std::isnan(v)) throw NumericalError("log integrand is NaN at t=" + std::to_string(t));
      ts.push_back(t);
      gs.push_back(v);
      if (v < floor) break;
      if (left_t.size() + right_t.size() > o.max_nodes)
        throw NumericalError("quadrature node cap exceeded");
    }
  }
  Sweep s;
  s.t.assign(left_t.rbegin(), left_t.rend());
  s.g.assign(left_g.rbegin(), left_g.rend());
  s.t.push_back(t_mode);
  s.g.push_back(g_mode);
  s.t.insert(s.t.end(), right_t.begin(), right_t.end());
  s.g.insert(s.g.end(), right_g.begin(), right_g.end());
  return s;
}

double log_trapezoid(const Sweep& s, double h) {
  return special::log_sum_exp(std::span<const double>(s.g)) + std::log(h);
}

}  // namespace

std::vector<double> LogGrid::probabilities() const {
  std::vector<double> p(log_weight.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(log_weight[i] - log_integral);
  return p;
}

double decreasing_root(const std::function<double(double)>& dg, double hint, double tol) {
  hint = std::clamp(hint, -kLimit + 1.0, kLimit - 1.0);
  const double at_hint = dg(hint);
  if (at_hint == 0.0) return hint;
  double lo = hint, hi = hint, flo = at_hint, fhi = at_hint;
  double step = 1.0;
  // Positive derivative: the root lies to the right.
  while ((at_hint > 0.0 ? fhi > 0.0 : flo < 0.0)) {
    if (at_hint > 0.0) {
      lo = hi;
      flo = fhi;
      hi = std::min(hi + step, kLimit);
      fhi = dg(hi);
      if (hi >= kLimit && fhi > 0.0) break;
    } else {
      hi = lo;
      fhi = flo;
      lo = std::max(lo - step, -kLimit);
      flo = dg(lo);
      if (lo <= -kLimit && flo < 0.0) break;
    }
    step *= 2.0;
  }
  if (!(flo >= 0.0 && fhi <= 0.0) || std::isnan(flo) || std::isnan(fhi)) {
    std::ostringstream msg;
    msg << "mode not found: derivative " << flo << " at t=" << lo << ", " << fhi << " at t=" << hi;
    throw NumericalError(msg.str());
  }
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(
      dg, lo, hi, flo, fhi,
      [tol](double a, double b) { return std::fabs(b - a) <= tol * std::max(1.0, std::fabs(a)); },
      iters);
  return 0.5 * (r.first + r.second);
}

LogGrid integrate_unimodal(const LogIntegrand& g, const std::function<double(double)>& dg,
                           double hint, const GridOptions& options) {
  LogGrid out;
  out.t_mode = decreasing_root(dg, hint, options.mode_tol);
  out.g_mode = g(out.t_mode);
  if (!std::isfinite(out.g_mode)) throw NumericalError("log integrand not finite at its mode");

  // Curvature from the derivative; fall back to unit width on flat spots.
  const double d = 1e-4 * std::max(1.0, std::fabs(out.t_mode));
  const double curvature = (dg(out.t_mode + d) - dg(out.t_mode - d)) / (2.0 * d);
  double width = (curvature < 0.0 && std::isfinite(curvature)) ? 1.0 / std::sqrt(-curvature) : 1.0;
  width = std::clamp(width, 1e-8, 50.0);

  double h = width / 2.0;
  Sweep s = sweep(g, out.t_mode, out.g_mode, h, options);
  double current = log_trapezoid(s, h);
  for (int refine = 0; refine < 30; ++refine) {
    const double h2 = h / 2.0;
    Sweep s2 = sweep(g, out.t_mode, out.g_mode, h2, options);
    const double next = log_trapezoid(s2, h2);
    const bool converged = std::fabs(std::expm1(next - current)) < options.rel_tol;
    h = h2;
    s = std::move(s2);
    current = next;
    if (converged) break;
  }
  out.step = h;
  out.log_integral = current;
  out.t = std::move(s.t);
  out.log_weight.resize(s.g.size());
  const double log_h = std::log(h);
  for (std::size_t i = 0; i < s.g.size(); ++i) out.log_weight[i] = s.g[i] + log_h;
  return out;
}

LogGrid integrate_unimodal(const LogIntegrand& g, double hint, const GridOptions& options) {
  auto dg = [&g](double t) {
    const double h = 1e-5 * std::max(1.0, std::fabs(t));
    return (g(t + h) - g(t - h)) / (2.0 * h);
  };
  return integrate_unimodal(g, dg, hint, options);
}

std::vector<double> grid_cdf(const LogGrid& grid) {
  const auto p = grid.probabilities();
  std::vector<double> cdf(p.size(), 0.0);
  for (std::size_t i = 1; i < p.size(); ++i) cdf[i] = cdf[i - 1] + 0.5 * (p[i - 1] + p[i]);
  const double total = cdf.back();
  if (total > 0.0)
    for (double& c : cdf) c /= total;
  return cdf;
}

double sample_grid(const LogGrid& grid, const std::vector<double>& cdf, Rng& rng) {
  const double v = uniform01(rng);
  auto it = std::upper_bound(cdf.begin(), cdf.end(), v);
  if (it == cdf.begin()) return grid.t.front();
  if (it == cdf.end()) return grid.t.back();
  const std::size_t i = static_cast<std::size_t>(it - cdf.begin());
  const double span = cdf[i] - cdf[i - 1];
  const double frac = span > 0.0 ? (v - cdf[i - 1]) / span : 0.5;
  return grid.t[i - 1] + frac * (grid.t[i] - grid.t[i - 1]);
}

}  // namespace nrmi::quad

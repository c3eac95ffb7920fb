// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: nrmi_acceptance [--only=N[,N...]] [--allow-fail=N[,N...]]
// Exit status is 0 when every selected criterion passes or is listed in
// --allow-fail; listed failures are still printed as FAIL.

#include <algorithm>
#include <array>
#include <filesystem>
#include <tuple>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nrmi/harness.hpp"
#include "nrmi/inference.hpp"
#include "nrmi/intensity.hpp"
#include "nrmi/posterior.hpp"
#include "nrmi/sampler.hpp"
#include "oracles.hpp"

using namespace nrmi;

namespace {

// Pinned tolerances.
constexpr double kTableTolerance = 0.06;
constexpr std::size_t kTableReplications = 500;
constexpr double kDpTolerance = 1e-3;
constexpr double kSigmaBand = 3.0;  // Monte Carlo standard errors
constexpr double kGdpRelTol = 1e-8;
constexpr double kNggpRelTol = 1e-14;
constexpr double kBvmDiscreteTol = 0.03;
constexpr double kBvmContinuousRelTol = 0.15;
constexpr double kEppfTol = 1e-6;
constexpr double kPmfTol = 1e-6;
constexpr double kDecayRatio = 0.6;
constexpr double kSlopeTol = 0.08;

struct Outcome {
  bool pass;
  std::string detail;
};

struct Stats {
  double sum = 0.0, sum_sq = 0.0;
  std::size_t n = 0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  double mean() const { return sum / static_cast<double>(n); }
  double se() const { return std::sqrt(std::max(0.0, sum_sq / n - mean() * mean()) / static_cast<double>(n)); }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Tables 1 and 2 of the reference study: uncorrected and corrected coverage.
const std::map<std::string, std::array<double, 3>> kUncorrected{
    {"P1", {0.791, 0.952, 0.961}}, {"P2", {0.695, 0.857, 0.928}}, {"P3", {0.712, 0.785, 0.811}}, {"P4", {0.601, 0.292, 0.078}}};
const std::map<std::string, std::array<double, 3>> kCorrected{
    {"P1", {0.977, 0.989, 0.991}}, {"P2", {0.914, 0.938, 0.951}}, {"P3", {0.863, 0.931, 0.962}}, {"P4", {0.901, 0.955, 0.969}}};

Outcome coverage_tables() {
  ExperimentConfig c;
  c.replications = kTableReplications;
  c.output_dir = (std::filesystem::temp_directory_path() / "nrmi_acceptance").string();
  const auto rows = run_coverage(c);
  std::ostringstream detail;
  int misses = 0;
  double worst = 0.0;
  std::map<std::pair<std::string, bool>, std::map<std::size_t, double>> got;
  for (const auto& r : rows) {
    const std::size_t col = r.n == 10 ? 0 : r.n == 100 ? 1 : 2;
    const double ref = (r.corrected ? kCorrected : kUncorrected).at(r.dist)[col];
    const double diff = r.coverage - ref;
    got[{r.dist, r.corrected}][r.n] = r.coverage;
    worst = std::max(worst, std::fabs(diff));
    if (std::fabs(diff) > kTableTolerance) ++misses;
    std::printf("    %s n=%-5zu %-11s coverage %.3f (se %.3f)  reference %.3f  diff %+.3f%s\n", r.dist.c_str(), r.n,
                r.corrected ? "corrected" : "uncorrected", r.coverage, r.mc_stderr, ref, diff,
                std::fabs(diff) > kTableTolerance ? "  <-- outside tolerance" : "");
  }
  const double u_p4 = got[{"P4", false}][1000], c_p4 = got[{"P4", true}][1000], c_p1 = got[{"P1", true}][100];
  const bool sig1 = u_p4 < 0.20, sig2 = c_p4 > 0.90, sig3 = c_p1 > 0.95;
  detail << misses << "/24 cells outside +-" << kTableTolerance << " (worst " << fmt("%.3f", worst) << ");"
         << " uncorrected P4@1000=" << fmt("%.3f", u_p4) << (sig1 ? " ok" : " FAIL")
         << ", corrected P4@1000=" << fmt("%.3f", c_p4) << (sig2 ? " ok" : " FAIL")
         << ", corrected P1@100=" << fmt("%.3f", c_p1) << (sig3 ? " ok" : " FAIL");
  return {misses == 0 && sig1 && sig2 && sig3, detail.str()};
}

Outcome dirichlet_limit() {
  const double v = posterior_moment(IntensitySpec::nggp(1.0, 1e-4, 1.0), Partition({1.0, 2.0}, {2, 1}),
                                    SetDescriptor::atoms({1.0}), 1);
  return {std::fabs(v - 0.5) <= kDpTolerance, fmt("E[P({1})|X] = %.6f vs 0.5", v)};
}

Outcome moment_vs_sampler() {
  Rng chooser(20240601, 3);
  std::ostringstream detail;
  int failures = 0;
  for (int c = 0; c < 10; ++c) {
    const int family = c % 3;
    const std::size_t n = (c / 3) % 2 == 0 ? 5 : 50;
    const std::size_t m = 1 + c % 2;
    IntensitySpec spec = IntensitySpec::nggp(1.0, 0.5, 1.0);
    if (family == 0) {
      spec = IntensitySpec::nggp(0.5 + 2.5 * uniform01(chooser), 0.1 + 0.8 * uniform01(chooser),
                                 0.2 + 2.8 * uniform01(chooser));
    } else if (family == 1) {
      spec = IntensitySpec::gdp(0.5 + 2.5 * uniform01(chooser), 1 + static_cast<int>(5 * uniform01(chooser)));
    } else {
      spec = IntensitySpec::extended_gamma(
          0.5 + 2.5 * uniform01(chooser),
          BetaTable({-0.5, 0.5}, {0.3 + 3 * uniform01(chooser), 0.3 + 3 * uniform01(chooser), 0.3 + 3 * uniform01(chooser)}));
    }
    const auto truth = uniform01(chooser) < 0.5 ? TrueDistribution::p1() : TrueDistribution::p3();
    const auto partition = partition_of(truth.sample(n, chooser));
    const double lo = 0.5 + std::floor(3 * uniform01(chooser));
    const auto set = SetDescriptor::interval(lo, lo + 1.0 + std::floor(3 * uniform01(chooser)));
    const auto density = build_latent_density(spec, partition);
    const double exact = posterior_moment(density, set, m);
    const SetProbabilitySampler sampler(density, set);
    Rng rng(77, static_cast<std::uint64_t>(c));
    Stats s;
    for (int i = 0; i < 100000; ++i) s.add(std::pow(sampler(rng).value, static_cast<double>(m)));
    const double z = (s.mean() - exact) / s.se();
    if (std::fabs(z) > kSigmaBand) ++failures;
    std::printf("    case %d %-34s n=%-3zu m=%zu quadrature %.6f  Monte Carlo %.6f  z=%+.2f\n", c, spec.name().c_str(),
                n, m, exact, s.mean(), z);
  }
  return {failures == 0, std::to_string(failures) + "/10 cases beyond 3 SE"};
}

Outcome laplace_closed_forms() {
  double worst_gdp = 0.0, worst_nggp = 0.0;
  for (int gamma : {1, 2, 5}) {
    for (double lambda : {0.1, 1.0, 10.0}) {
      const double mass = 0.7;
      double rising = 1.0;
      for (int j = 1; j <= gamma; ++j) rising *= (lambda + j) / j;
      const double closed = std::pow(1.0 / rising, mass);
      const double got = std::exp(-laplace_exponent(IntensitySpec::gdp(1.0, gamma), lambda, mass));
      worst_gdp = std::max(worst_gdp, std::fabs(got / closed - 1.0));
    }
  }
  for (auto [a, sigma, theta] : {std::tuple{1.0, 0.5, 1.0}, std::tuple{2.0, 0.3, 0.5}, std::tuple{0.4, 0.9, 3.0}}) {
    for (double lambda : {0.1, 1.0, 10.0}) {
      const double mass = 0.7 * a;
      const double closed = mass / sigma * (std::pow(theta + lambda, sigma) - std::pow(theta, sigma));
      const double got = laplace_exponent(IntensitySpec::nggp(a, sigma, theta), lambda, mass);
      worst_nggp = std::max(worst_nggp, std::fabs(got / closed - 1.0));
    }
  }
  return {worst_gdp <= kGdpRelTol && worst_nggp <= kNggpRelTol,
          fmt("worst relative error GDP %.2e, NGGP %.2e", worst_gdp, worst_nggp)};
}

Outcome assumption_checker() {
  const auto grid = default_u_grid();
  const std::vector<double> probes{-1.0, 0.0, 1.0};
  const auto nggp = check_assumption_a(IntensitySpec::nggp(1.0, 0.3, 1.0), grid, 10, probes);
  const auto gdp = check_assumption_a(IntensitySpec::gdp(1.0, 3), grid, 10, probes);
  const auto beta = BetaTable::from_function([](double x) { return 1.0 + x * x; }, {-1.5, -0.5, 0.5, 1.5});
  const auto eg = check_assumption_a(IntensitySpec::extended_gamma(1.0, beta), grid, 10, probes);
  double c_nggp_max = 0.0, c_nggp_min = 1.0, c_gdp = 0.0, c_eg = 0.0;
  for (const auto& e : nggp.c_estimates) {
    c_nggp_max = std::max(c_nggp_max, e.c);
    c_nggp_min = std::min(c_nggp_min, e.c);
  }
  for (const auto& e : gdp.c_estimates) c_gdp = std::max(c_gdp, e.c);
  for (const auto& e : eg.c_estimates) c_eg = std::max(c_eg, e.c);
  const bool examples = nggp.monotone_ok && nggp.bound_ok && gdp.monotone_ok && gdp.bound_ok && eg.monotone_ok &&
                        eg.bound_ok && c_nggp_min > 0.29 && c_nggp_max < 0.31 && c_gdp < 0.01 && c_eg < 0.01;

  const auto counter = IntensitySpec::custom(1.0, "s^-1/2 exp(-s^2)", [](double s) { return -0.5 * std::log(s) - s * s; });
  const auto report = check_assumption_a(counter, grid, 8, {0.0});
  bool monotone = true, bound = true;
  for (std::size_t k = 1; k <= 8; ++k) {
    double prev = -INFINITY;
    for (double u : grid) {
      const double r = tau_ratio(counter, k, u);
      if (r < prev - 1e-9 * std::max(1.0, std::fabs(prev))) monotone = false;
      if (!(r < static_cast<double>(k))) bound = false;
      prev = r;
    }
  }
  const bool consistent = report.monotone_ok == monotone && report.bound_ok == bound &&
                          report.violations.empty() == (monotone && bound);
  std::ostringstream d;
  d << "examples " << (examples ? "pass" : "FAIL") << fmt(" (C_k NGGP in [%.4f, %.4f], GDP <= %.1e, EG <= %.1e)", c_nggp_min,
                                                       c_nggp_max, c_gdp, c_eg)
    << "; counterexample monotone_ok=" << report.monotone_ok << " bound_ok=" << report.bound_ok << " violations="
    << report.violations.size() << (consistent ? " consistent with direct grid" : " INCONSISTENT");
  return {examples && consistent, d.str()};
}

Outcome prior_total_mass() {
  std::ostringstream d;
  bool ok = true;
  for (auto [a, sigma, theta] : {std::tuple{1.0, 0.5, 1.0}, std::tuple{2.0, 0.3, 0.5}}) {
    const auto spec = IntensitySpec::nggp(a, sigma, theta);
    Rng rng(6, static_cast<std::uint64_t>(sigma * 10));
    Stats s;
    for (int i = 0; i < 10000; ++i) {
      const auto jumps = ferguson_klass_jumps(spec, 0.0, TruncationPolicy::relative_tail(1e-3), rng);
      s.add(std::accumulate(jumps.begin(), jumps.end(), 0.0));
    }
    const double target = a * std::pow(theta, sigma - 1.0);
    const double z = (s.mean() - target) / s.se();
    ok = ok && std::fabs(z) <= kSigmaBand;
    d << fmt("(%.1f,%.1f,%.1f): ", a, sigma, theta) << fmt("%.4f vs %.4f z=%+.2f; ", s.mean(), target, z);
  }
  return {ok, d.str()};
}

Outcome bvm_diagnostic() {
  const auto spec = IntensitySpec::nggp(1.0, 0.5, 1.0);
  Rng rng(2000, 7);
  const auto discrete =
      bvm_variance_check(spec, TrueDistribution::p1(), Functional::indicator(2.0, INFINITY), 2000, 20000, rng);
  const auto continuous =
      bvm_variance_check(spec, TrueDistribution::by_id("Exp1"), Functional::indicator(0.0, 1.0), 2000, 20000, rng);
  const bool ok1 = std::fabs(discrete.empirical - 0.16) <= kBvmDiscreteTol;
  const double rel = std::fabs(continuous.empirical / continuous.theoretical - 1.0);
  const bool ok2 = rel <= kBvmContinuousRelTol;
  return {ok1 && ok2, fmt("discrete n*Var = %.4f (target 0.16); continuous n*Var = %.4f vs limit %.4f (rel %.3f)",
                          discrete.empirical, continuous.empirical, continuous.theoretical, rel)};
}

Outcome eppf_checks() {
  double worst = 0.0;
  for (std::size_t n : {2u, 3u}) {
    double total = 0.0;
    for (const auto& blocks : oracle::set_partition_block_sizes(n)) total += std::exp(eppf_loglik(0.5, blocks, 1.0, 1.0));
    worst = std::max(worst, std::fabs(total - 1.0));
  }
  int inside = 0;
  std::ostringstream est;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed, 10000);
    const auto s = mle_sigma(partition_of(TrueDistribution::p3().sample(10000, rng)), 1.0, 1.0).sigma;
    inside += s > 0.35 && s < 0.65;
    est << fmt("%.3f ", s);
  }
  std::printf("    sigma estimates: %s\n", est.str().c_str());
  return {worst <= kEppfTol && inside >= 18, fmt("normalization error %.1e; %g/20 seeds in (0.35, 0.65)", worst, inside)};
}

Outcome ncluster_checks() {
  const auto spec = IntensitySpec::nggp(1.0, 0.5, 1.0);
  double worst = 0.0;
  for (std::size_t n = 1; n <= 8; ++n) {
    const auto pmf = ncluster_pmf(spec, n);
    worst = std::max(worst, std::fabs(pmf.raw_total - 1.0));
  }
  const auto pmf = ncluster_pmf(spec, 4);
  Rng rng(4, 4);
  std::vector<double> counts(4, 0.0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const auto series = ferguson_klass(spec, 0.0, TruncationPolicy::relative_tail(1e-2), rng, false);
    const double total = series.retained + series.residual_mass;
    std::vector<double> cumulative(series.jumps.size());
    std::partial_sum(series.jumps.begin(), series.jumps.end(), cumulative.begin());
    std::set<std::ptrdiff_t> seen;
    int clusters = 0;
    for (int j = 0; j < 4; ++j) {
      const double v = uniform01(rng) * total;
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), v);
      if (it == cumulative.end()) {
        ++clusters;  // residual mass is diffuse
      } else if (seen.insert(it - cumulative.begin()).second) {
        ++clusters;
      }
    }
    counts[static_cast<std::size_t>(clusters - 1)] += 1.0;
  }
  double worst_z = 0.0;
  std::ostringstream d;
  for (std::size_t k = 0; k < 4; ++k) {
    const double p = counts[k] / draws;
    const double se = std::sqrt(pmf.pmf[k] * (1.0 - pmf.pmf[k]) / draws);
    worst_z = std::max(worst_z, std::fabs(p - pmf.pmf[k]) / se);
    d << fmt("k=%.0f %.4f/%.4f ", static_cast<double>(k + 1), pmf.pmf[k], p);
  }
  return {worst <= kPmfTol && worst_z <= kSigmaBand,
          fmt("raw total error %.1e; worst z %.2f; ", worst, worst_z) + d.str()};
}

Outcome consistency_decay() {
  const auto spec = IntensitySpec::nggp(1.0, 0.5, 1.0);
  const std::vector<double> bounds{0.5, 1.5, 2.5, 3.5, 4.5, 5.5};
  double v1 = 0.0, v2 = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng a(seed, 1000), b(seed, 2000);
    v1 += consistency_diagnostic(spec, partition_of(TrueDistribution::p1().sample(1000, a)), bounds);
    v2 += consistency_diagnostic(spec, partition_of(TrueDistribution::p1().sample(2000, b)), bounds);
  }
  const double ratio = v2 / v1;
  return {ratio <= kDecayRatio, fmt("mean diagnostic %.3e at n=1000, %.3e at n=2000, ratio %.3f", v1 / 10, v2 / 10, ratio)};
}

Outcome cluster_slopes() {
  const std::vector<std::pair<std::string, double>> cases{{"P2", 1.0 / 3.0}, {"P3", 0.5}, {"P4", 2.0 / 3.0}};
  const std::vector<std::size_t> sizes{100, 1000, 10000, 100000};
  bool ok = true;
  std::ostringstream d;
  for (const auto& [id, target] : cases) {
    const auto truth = TrueDistribution::by_id(id);
    std::vector<double> lx, ly;
    for (auto n : sizes) {
      double total = 0.0;
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed, n + 17);
        total += static_cast<double>(partition_of(truth.sample(n, rng)).clusters());
      }
      lx.push_back(std::log(static_cast<double>(n)));
      ly.push_back(std::log(total / 20.0));
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    const double slope = sxy / sxx;
    ok = ok && std::fabs(slope - target) <= kSlopeTol;
    d << id << fmt(" %.3f (target %.3f); ", slope, target);
  }
  return {ok, d.str()};
}

std::set<int> parse_list(const std::string& arg) {
  std::set<int> out;
  std::stringstream in(arg);
  std::string item;
  while (std::getline(in, item, ',')) out.insert(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, allowed;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg.rfind("--only=", 0) == 0) only = parse_list(arg.substr(7));
    else if (arg.rfind("--allow-fail=", 0) == 0) allowed = parse_list(arg.substr(13));
    else {
      std::fprintf(stderr, "unknown argument %s\n", arg.c_str());
      return 2;
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"coverage tables at desk scale", coverage_tables},
      {"Dirichlet-process limit", dirichlet_limit},
      {"moment engine vs sampler", moment_vs_sampler},
      {"Laplace-exponent closed forms", laplace_closed_forms},
      {"assumption checker", assumption_checker},
      {"prior total-mass identity", prior_total_mass},
      {"Bernstein-von Mises variance", bvm_diagnostic},
      {"EPPF normalization and sigma estimate", eppf_checks},
      {"cluster-count pmf", ncluster_checks},
      {"consistency decay", consistency_decay},
      {"cluster-growth slopes", cluster_slopes},
  };
  int blocking = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d %s  %s: %s [%.1fs]%s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str(), secs, !o.pass && allowed.count(id) ? " (known failure, allowed)" : "");
    std::fflush(stdout);
    if (!o.pass && !allowed.count(id)) ++blocking;
  }
  return blocking == 0 ? 0 : 1;
}

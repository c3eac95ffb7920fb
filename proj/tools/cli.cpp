#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "nrmi/error.hpp"
#include "nrmi/harness.hpp"
#include "nrmi/inference.hpp"
#include "nrmi/intensity.hpp"
#include "nrmi/posterior.hpp"
#include "nrmi/sampler.hpp"

namespace nrmi::cli {
namespace {

using nlohmann::json;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IntensityOptions {
  std::string family = "nggp";
  double a = 1.0;
  double sigma = 0.5;
  double theta = 1.0;
  int gamma = 1;
  std::vector<double> beta{1.0};
  std::vector<double> beta_breaks;
  std::string base = "normal:0,1";

  void attach(CLI::App* cmd) {
    cmd->add_option("--family", family, "nggp | gdp | extended-gamma")
        ->check(CLI::IsMember({"nggp", "gdp", "extended-gamma"}))
        ->capture_default_str();
    cmd->add_option("--a", a, "total mass of the base measure")->capture_default_str();
    cmd->add_option("--sigma", sigma, "NGGP discount")->capture_default_str();
    cmd->add_option("--theta", theta, "NGGP tilting")->capture_default_str();
    cmd->add_option("--gamma", gamma, "GDP order")->capture_default_str();
    cmd->add_option("--beta", beta, "extended-gamma rates, one per cell")->delimiter(',');
    cmd->add_option("--beta-breaks", beta_breaks, "cell boundaries for --beta")->delimiter(',');
    cmd->add_option("--base", base, "base law: normal:m,s | exponential:r | uniform:lo,hi")->capture_default_str();
  }

  IntensitySpec build() const {
    const auto law = parse_base_law(base);
    if (family == "nggp") return IntensitySpec::nggp(a, sigma, theta, law);
    if (family == "gdp") return IntensitySpec::gdp(a, gamma, law);
    return IntensitySpec::extended_gamma(a, BetaTable(beta_breaks, beta), law);
  }
};

std::vector<double> read_numbers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::vector<double> xs;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream words(line);
    std::string word;
    while (words >> word) {
      try {
        xs.push_back(std::stod(word));
      } catch (const std::exception&) {
        throw UsageError("'" + path + "': not a number: " + word);
      }
    }
  }
  return xs;
}

// "lo,hi" or "atoms:y1,y2,...".
SetDescriptor parse_set(const std::string& text) {
  if (text.rfind("atoms:", 0) == 0) {
    std::vector<double> pts;
    std::stringstream in(text.substr(6));
    std::string item;
    while (std::getline(in, item, ',')) pts.push_back(std::stod(item));
    return SetDescriptor::atoms(std::move(pts));
  }
  const auto f = parse_functional("indicator:" + text);
  return *f.indicator_of;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

json report_json(const AssumptionReport& r) {
  json out;
  out["monotone_ok"] = r.monotone_ok;
  out["bound_ok"] = r.bound_ok;
  out["k_max"] = r.k_max;
  out["u_grid"] = r.u_grid;
  out["x_probe"] = r.x_probe;
  out["c_estimates"] = json::array();
  for (const auto& e : r.c_estimates) out["c_estimates"].push_back({{"k", e.k}, {"x", e.x}, {"c", e.c}});
  out["violations"] = json::array();
  for (const auto& v : r.violations)
    out["violations"].push_back({{"kind", v.kind}, {"k", v.k}, {"x", v.x}, {"u", v.u}, {"ratio", v.ratio}});
  return out;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Posterior computation and coverage experiments for normalized random measures", "nrmi-lab"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // check-assumption
  IntensityOptions ca_opts;
  std::size_t ca_kmax = 5;
  std::vector<double> ca_probes{0.0};
  auto* ca = app.add_subcommand("check-assumption", "grid check of the tau-ratio assumption; JSON report");
  ca_opts.attach(ca);
  ca->add_option("--k-max", ca_kmax, "largest k checked")->capture_default_str();
  ca->add_option("--probes", ca_probes, "locations x probed")->delimiter(',');

  // moments
  IntensityOptions mo_opts;
  std::string mo_data;
  std::vector<std::string> mo_sets;
  std::size_t mo_order = 2;
  auto* mo = app.add_subcommand("moments", "posterior moments E[P(A)^m | X]; CSV");
  mo_opts.attach(mo);
  mo->add_option("--data", mo_data, "file of observations")->required();
  mo->add_option("--set", mo_sets, "set as lo,hi or atoms:y1,y2 (repeatable)")->required();
  mo->add_option("--max-order", mo_order, "moments 1..m")->capture_default_str();

  // sample-posterior
  IntensityOptions sp_opts;
  std::string sp_data, sp_functional = "indicator:2,inf", sp_sampler = "exact";
  std::size_t sp_draws = 1000;
  std::uint64_t sp_seed = 1;
  std::optional<double> sp_eps;
  auto* sp = app.add_subcommand("sample-posterior", "posterior draws of Pf; CSV");
  sp_opts.attach(sp);
  sp->add_option("--data", sp_data, "file of observations")->required();
  sp->add_option("--draws", sp_draws)->capture_default_str();
  sp->add_option("--seed", sp_seed)->capture_default_str();
  sp->add_option("--functional", sp_functional)->capture_default_str();
  sp->add_option("--sampler", sp_sampler)->check(CLI::IsMember({"exact", "ferguson-klass"}))->capture_default_str();
  sp->add_option("--epsilon", sp_eps, "relative truncation (default 1/sqrt(n))");

  // credible
  IntensityOptions cr_opts;
  std::string cr_draws, cr_data, cr_functional = "indicator:2,inf";
  double cr_alpha = 0.025, cr_beta = 0.975;
  bool cr_correct = false;
  std::size_t cr_count = 1000;
  std::uint64_t cr_seed = 1;
  auto* cr = app.add_subcommand("credible", "credible interval from draws or data; JSON");
  cr_opts.attach(cr);
  cr->add_option("--draws-file", cr_draws, "file of posterior Pf draws");
  cr->add_option("--data", cr_data, "observations (draws are sampled when --draws-file is absent)");
  cr->add_option("--functional", cr_functional)->capture_default_str();
  cr->add_option("--lower", cr_alpha, "lower quantile level")->capture_default_str();
  cr->add_option("--upper", cr_beta, "upper quantile level")->capture_default_str();
  cr->add_flag("--correct", cr_correct, "subtract the bias term (needs --data)");
  cr->add_option("--draws", cr_count, "posterior draws when sampling")->capture_default_str();
  cr->add_option("--seed", cr_seed)->capture_default_str();

  // coverage / density
  std::string ex_config;
  std::optional<std::uint64_t> ex_seed;
  std::optional<std::string> ex_out;
  std::optional<std::size_t> ex_reps;
  auto* cov = app.add_subcommand("coverage", "coverage tables; writes coverage.csv");
  auto* den = app.add_subcommand("density", "posterior marginal histograms; writes density_*.csv");
  for (auto* cmd : {cov, den}) {
    cmd->add_option("--config", ex_config, "experiment config file")->required();
    cmd->add_option("--seed", ex_seed, "override the config seed");
    cmd->add_option("--output-dir", ex_out, "override the config output_dir");
    cmd->add_option("--replications", ex_reps, "override the config replications");
  }

  // mle-sigma
  std::string ml_data;
  double ml_a = 1.0, ml_theta = 1.0;
  auto* ml = app.add_subcommand("mle-sigma", "maximum-EPPF estimate of sigma; JSON");
  ml->add_option("--data", ml_data, "file of observations")->required();
  ml->add_option("--a", ml_a)->capture_default_str();
  ml->add_option("--theta", ml_theta)->capture_default_str();

  // nclusters
  IntensityOptions nc_opts;
  std::size_t nc_n = 4;
  auto* nc = app.add_subcommand("nclusters", "prior law of the number of clusters (n <= 8); CSV");
  nc_opts.attach(nc);
  nc->add_option("--n", nc_n, "sample size")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (ca->parsed()) {
      const auto report = check_assumption_a(ca_opts.build(), default_u_grid(), ca_kmax, ca_probes);
      out << report_json(report).dump(2) << "\n";
    } else if (mo->parsed()) {
      const auto density = build_latent_density(mo_opts.build(), partition_of(read_numbers(mo_data)));
      out << "set,m,moment\n";
      for (const auto& text : mo_sets) {
        const auto set = parse_set(text);
        for (std::size_t m = 1; m <= mo_order; ++m)
          out << '"' << set.describe() << "\"," << m << "," << fmt(posterior_moment(density, set, m)) << "\n";
      }
    } else if (sp->parsed()) {
      const auto data = read_numbers(sp_data);
      const auto spec = sp_opts.build();
      const auto density = build_latent_density(spec, partition_of(data));
      const auto f = parse_functional(sp_functional);
      const auto policy = sp_eps ? TruncationPolicy::relative_tail(*sp_eps) : TruncationPolicy::for_sample_size(data.size());
      Rng rng(sp_seed, 0);
      out << "draw,u_latent,kappa,pf\n";
      if (sp_sampler == "exact" && f.indicator_of) {
        const SetProbabilitySampler sampler(density, *f.indicator_of);
        for (std::size_t i = 0; i < sp_draws; ++i) {
          const auto d = sampler(rng);
          out << i << "," << fmt(d.u_latent) << "," << fmt(d.kappa) << "," << fmt(d.value) << "\n";
        }
      } else {
        for (std::size_t i = 0; i < sp_draws; ++i) {
          const auto d = sample_posterior(density, policy, rng);
          out << i << "," << fmt(d.u_latent) << "," << fmt(d.kappa) << "," << fmt(d.integrate(f)) << "\n";
        }
      }
    } else if (cr->parsed()) {
      if (cr_draws.empty() && cr_data.empty()) throw UsageError("credible needs --draws-file or --data");
      if (cr_correct && cr_data.empty()) throw UsageError("--correct needs --data");
      const auto f = parse_functional(cr_functional);
      const auto spec = cr_opts.build();
      std::optional<Partition> partition;
      if (!cr_data.empty()) partition = partition_of(read_numbers(cr_data));
      std::vector<double> draws;
      if (!cr_draws.empty()) {
        draws = read_numbers(cr_draws);
      } else {
        Rng rng(cr_seed, 0);
        const auto density = build_latent_density(spec, *partition);
        draws = sample_functional(density, f, cr_count, TruncationPolicy::for_sample_size(partition->n()), rng);
      }
      std::optional<BiasInputs> correction;
      if (cr_correct) correction = bias_inputs(spec, *partition, f);
      const auto ci = credible_interval(draws, cr_alpha, cr_beta, correction);
      json j{{"lo", ci.lo}, {"hi", ci.hi}, {"alpha", ci.alpha}, {"beta", ci.beta},
             {"corrected", ci.corrected}, {"bias", ci.bias}, {"draws", draws.size()}};
      out << j.dump(2) << "\n";
    } else if (cov->parsed() || den->parsed()) {
      auto config = ExperimentConfig::load(ex_config);
      if (ex_seed) config.seed = *ex_seed;
      if (ex_out) config.output_dir = *ex_out;
      if (ex_reps) config.replications = *ex_reps;
      config.validate();
      ensure_output_dir(config.output_dir);
      if (cov->parsed()) {
        const auto path = (std::filesystem::path(config.output_dir) / "coverage.csv").string();
        write_coverage_csv(run_coverage(config), config, path);
        out << path << "\n";
      } else {
        for (const auto& path : write_density_csvs(run_density(config), config)) out << path << "\n";
      }
    } else if (ml->parsed()) {
      const auto partition = partition_of(read_numbers(ml_data));
      const auto est = mle_sigma(partition, ml_a, ml_theta);
      if (est.at_boundary) err << "warning: maximizer at the boundary of the search interval\n";
      json j{{"sigma", est.sigma}, {"loglik", est.loglik}, {"at_boundary", est.at_boundary},
             {"n", partition.n()}, {"clusters", partition.clusters()}};
      out << j.dump(2) << "\n";
    } else if (nc->parsed()) {
      const auto pmf = ncluster_pmf(nc_opts.build(), nc_n);
      out << "# raw_total=" << fmt(pmf.raw_total) << "\n";
      out << "k,probability\n";
      for (std::size_t k = 1; k <= pmf.pmf.size(); ++k) out << k << "," << fmt(pmf.pmf[k - 1]) << "\n";
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace nrmi::cli

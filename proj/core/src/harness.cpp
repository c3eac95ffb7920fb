#include "nrmi/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "nrmi/inference.hpp"
#include "nrmi/posterior.hpp"

namespace nrmi {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& s, const std::string& key) {
  const std::string t = trim(s);
  if (t == "inf" || t == "+inf") return kInf;
  if (t == "-inf") return -kInf;
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number for '" + key + "': '" + s + "'");
  }
}

std::uint64_t parse_u64(const std::string& s, const std::string& key) {
  const std::string t = trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw std::invalid_argument("bad integer for '" + key + "': '" + s + "'");
  return v;
}

std::string format_double(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> parse_number_list(const std::string& args, std::size_t expected, const std::string& what) {
  std::vector<double> out;
  for (const auto& piece : split(args, ',')) out.push_back(parse_double(piece, what));
  if (out.size() != expected) throw std::invalid_argument(what + " expects " + std::to_string(expected) + " numbers");
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

ContinuousLaw parse_base_law(const std::string& id) {
  const auto colon = id.find(':');
  const std::string kind = trim(id.substr(0, colon));
  const std::string args = colon == std::string::npos ? "" : id.substr(colon + 1);
  if (kind == "normal") {
    if (args.empty()) return ContinuousLaw::standard_normal();
    const auto v = parse_number_list(args, 2, "normal");
    return ContinuousLaw::normal(v[0], v[1]);
  }
  if (kind == "exponential") {
    if (args.empty()) return ContinuousLaw::exponential(1.0);
    return ContinuousLaw::exponential(parse_number_list(args, 1, "exponential")[0]);
  }
  if (kind == "uniform") {
    const auto v = parse_number_list(args, 2, "uniform");
    return ContinuousLaw::uniform(v[0], v[1]);
  }
  throw std::invalid_argument("unknown base measure '" + id + "'");
}

Functional parse_functional(const std::string& id) {
  const auto colon = id.find(':');
  const std::string kind = trim(id.substr(0, colon));
  const std::string args = colon == std::string::npos ? "" : id.substr(colon + 1);
  if (kind == "indicator") {
    const auto v = parse_number_list(args, 2, "indicator");
    return Functional::indicator(v[0], v[1]);
  }
  if (kind == "constant") return Functional::constant(parse_number_list(args, 1, "constant")[0]);
  if (kind == "identity") return Functional::identity();
  throw std::invalid_argument("unknown functional '" + id + "'");
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "true_dist") {
      c.true_dists = split(value, ',');
    } else if (key == "nggp.a") {
      c.a = parse_double(value, key);
    } else if (key == "nggp.sigma") {
      c.sigma = parse_double(value, key);
    } else if (key == "nggp.theta") {
      c.theta = parse_double(value, key);
    } else if (key == "nggp.base") {
      c.base = value;
    } else if (key == "sample_sizes") {
      c.sample_sizes.clear();
      for (const auto& s : split(value, ',')) c.sample_sizes.push_back(parse_u64(s, key));
    } else if (key == "replications") {
      c.replications = parse_u64(value, key);
    } else if (key == "posterior_draws_per_rep") {
      c.posterior_draws_per_rep = parse_u64(value, key);
    } else if (key == "functional") {
      c.functional = value;
    } else if (key == "level.alpha") {
      c.alpha = parse_double(value, key);
    } else if (key == "level.beta") {
      c.beta = parse_double(value, key);
    } else if (key == "seed") {
      c.seed = parse_u64(value, key);
    } else if (key == "truncation_epsilon") {
      if (value == "auto")
        c.truncation_epsilon.reset();
      else
        c.truncation_epsilon = parse_double(value, key);
    } else if (key == "output_dir") {
      c.output_dir = value;
    } else if (key == "sampler") {
      c.sampler = value;
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream out;
  auto join = [](const auto& xs) {
    std::ostringstream s;
    for (std::size_t i = 0; i < xs.size(); ++i) s << (i ? "," : "") << xs[i];
    return s.str();
  };
  out << "true_dist = " << join(true_dists) << "\n"
      << "nggp.a = " << format_double(a) << "\n"
      << "nggp.sigma = " << format_double(sigma) << "\n"
      << "nggp.theta = " << format_double(theta) << "\n"
      << "nggp.base = " << base << "\n"
      << "sample_sizes = " << join(sample_sizes) << "\n"
      << "replications = " << replications << "\n"
      << "posterior_draws_per_rep = " << posterior_draws_per_rep << "\n"
      << "functional = " << functional << "\n"
      << "level.alpha = " << format_double(alpha) << "\n"
      << "level.beta = " << format_double(beta) << "\n"
      << "seed = " << seed << "\n"
      << "truncation_epsilon = " << (truncation_epsilon ? format_double(*truncation_epsilon) : "auto") << "\n"
      << "output_dir = " << output_dir << "\n"
      << "sampler = " << sampler << "\n";
  return out.str();
}

std::uint64_t ExperimentConfig::hash() const {
  ExperimentConfig located = *this;
  located.output_dir.clear();
  return fnv1a(located.serialize());
}

void ExperimentConfig::validate() const {
  if (true_dists.empty()) throw std::invalid_argument("true_dist must name at least one distribution");
  for (const auto& d : true_dists) TrueDistribution::by_id(d);
  if (sample_sizes.empty()) throw std::invalid_argument("sample_sizes must be nonempty");
  for (auto n : sample_sizes)
    if (n == 0) throw std::invalid_argument("sample sizes must be positive");
  if (replications < 1) throw std::invalid_argument("replications must be at least 1");
  if (posterior_draws_per_rep < 100) throw std::invalid_argument("insufficient draws");
  if (!(alpha >= 0.0 && alpha < beta && beta <= 1.0))
    throw std::invalid_argument("levels must satisfy 0 <= alpha < beta <= 1");
  if (truncation_epsilon && !(*truncation_epsilon > 0.0 && *truncation_epsilon < 1.0))
    throw std::invalid_argument("truncation_epsilon must lie in (0, 1)");
  if (sampler != "exact" && sampler != "ferguson-klass")
    throw std::invalid_argument("sampler must be 'exact' or 'ferguson-klass'");
  prior();
  target();
}

IntensitySpec ExperimentConfig::prior() const {
  return IntensitySpec::nggp(a, sigma, theta, parse_base_law(base));
}

Functional ExperimentConfig::target() const { return parse_functional(functional); }

TruncationPolicy ExperimentConfig::truncation(std::size_t n) const {
  return truncation_epsilon ? TruncationPolicy::relative_tail(*truncation_epsilon)
                            : TruncationPolicy::for_sample_size(n);
}

PosteriorRoute ExperimentConfig::route() const {
  return sampler == "exact" ? PosteriorRoute::Auto : PosteriorRoute::FergusonKlass;
}

// ---------------------------------------------------------------------------
// Parallel execution

std::size_t worker_count() {
  if (const char* env = std::getenv("NRMI_LAB_THREADS")) {
    char* end = nullptr;
    const long requested = std::strtol(env, &end, 10);
    if (end != env && requested > 0) return std::min<std::size_t>(static_cast<std::size_t>(requested), 256);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task) {
  const std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Rng replication_rng(std::uint64_t seed, const std::string& dist, std::size_t n, std::size_t replication) {
  return Rng(seed, stream_id({fnv1a(dist), n, replication}));
}

// ---------------------------------------------------------------------------
// Experiments

std::vector<CoverageRow> run_coverage(const ExperimentConfig& config) {
  config.validate();
  ensure_output_dir(config.output_dir);
  const auto prior = config.prior();
  const auto f = config.target();
  std::vector<CoverageRow> rows;
  for (const auto& dist_id : config.true_dists) {
    const auto truth = TrueDistribution::by_id(dist_id);
    const double p0f = truth.expectation(f);
    for (auto n : config.sample_sizes) {
      std::vector<char> hit_plain(config.replications), hit_corrected(config.replications);
      parallel_for(config.replications, [&](std::size_t r) {
        Rng rng = replication_rng(config.seed, dist_id, n, r);
        const auto partition = partition_of(truth.sample(n, rng));
        const auto density = build_latent_density(prior, partition);
        const auto draws =
            sample_functional(density, f, config.posterior_draws_per_rep, config.truncation(n), rng, config.route());
        hit_plain[r] = credible_interval(draws, config.alpha, config.beta).contains(p0f);
        hit_corrected[r] =
            credible_interval(draws, config.alpha, config.beta, bias_inputs(prior, partition, f)).contains(p0f);
      });
      const double reps = static_cast<double>(config.replications);
      for (bool corrected : {false, true}) {
        const auto& hits = corrected ? hit_corrected : hit_plain;
        const double cov = static_cast<double>(std::count(hits.begin(), hits.end(), 1)) / reps;
        rows.push_back({dist_id, n, corrected, cov, std::sqrt(cov * (1.0 - cov) / reps), config.replications});
      }
    }
  }
  return rows;
}

double sample_skewness(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double m2 = 0.0, m3 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  return m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
}

DensityHistogram histogram(std::vector<double> draws) {
  if (draws.empty()) throw std::invalid_argument("histogram of no draws");
  DensityHistogram h{};
  h.skewness = sample_skewness(draws);
  std::sort(draws.begin(), draws.end());
  const double lo = draws.front(), hi = draws.back();
  const double iqr = quantile_sorted(draws, 0.75) - quantile_sorted(draws, 0.25);
  const double width = 2.0 * iqr / std::cbrt(static_cast<double>(draws.size()));
  std::size_t bins = 1;
  if (width > 0.0 && hi > lo) bins = static_cast<std::size_t>(std::clamp(std::ceil((hi - lo) / width), 1.0, 10000.0));
  const double step = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  std::vector<std::size_t> counts(bins, 0);
  for (double x : draws) {
    auto b = static_cast<std::size_t>((x - lo) / step);
    counts[std::min(b, bins - 1)]++;
  }
  for (std::size_t b = 0; b < bins; ++b) {
    h.bin_lo.push_back(lo + static_cast<double>(b) * step);
    h.bin_hi.push_back(b + 1 == bins ? std::max(hi, lo + step) : lo + static_cast<double>(b + 1) * step);
    h.mass.push_back(static_cast<double>(counts[b]) / static_cast<double>(draws.size()));
  }
  return h;
}

std::vector<DensityHistogram> run_density(const ExperimentConfig& config) {
  config.validate();
  ensure_output_dir(config.output_dir);
  const auto prior = config.prior();
  const auto f = config.target();
  std::vector<std::pair<std::string, std::size_t>> cells;
  for (const auto& dist_id : config.true_dists)
    for (auto n : config.sample_sizes) cells.emplace_back(dist_id, n);
  std::vector<DensityHistogram> out(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    const auto& [dist_id, n] = cells[i];
    Rng rng = replication_rng(config.seed, dist_id, n, 0);
    const auto truth = TrueDistribution::by_id(dist_id);
    const auto density = build_latent_density(prior, partition_of(truth.sample(n, rng)));
    auto h = histogram(
        sample_functional(density, f, config.posterior_draws_per_rep, config.truncation(n), rng, config.route()));
    h.dist = dist_id;
    h.n = n;
    out[i] = std::move(h);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Output

void ensure_output_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::invalid_argument("output directory '" + dir + "' is unreachable");
  const auto probe = fs::path(dir) / ".nrmi-write-probe";
  {
    std::ofstream out(probe);
    if (!out) throw std::invalid_argument("output directory '" + dir + "' is not writable");
  }
  fs::remove(probe, ec);
}

std::string provenance_line(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "# config_hash=" << std::hex << std::setw(16) << std::setfill('0') << config.hash() << std::dec
      << ", seed=" << config.seed;
  return out.str();
}

void write_coverage_csv(const std::vector<CoverageRow>& rows, const ExperimentConfig& config,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write '" + path + "'");
  out << provenance_line(config) << "\n";
  out << "dist,n,corrected,coverage,stderr,reps\n";
  for (const auto& r : rows)
    out << r.dist << "," << r.n << "," << (r.corrected ? "true" : "false") << "," << format_double(r.coverage)
        << "," << format_double(r.mc_stderr) << "," << r.replications << "\n";
}

std::vector<std::string> write_density_csvs(const std::vector<DensityHistogram>& histograms,
                                            const ExperimentConfig& config) {
  std::vector<std::string> paths;
  const bool tag_dist = config.true_dists.size() > 1;
  for (const auto& h : histograms) {
    const std::string name =
        tag_dist ? "density_" + h.dist + "_" + std::to_string(h.n) + ".csv" : "density_" + std::to_string(h.n) + ".csv";
    const auto path = (std::filesystem::path(config.output_dir) / name).string();
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write '" + path + "'");
    out << provenance_line(config) << "\n";
    out << "bin_lo,bin_hi,mass,skewness\n";
    for (std::size_t b = 0; b < h.mass.size(); ++b)
      out << format_double(h.bin_lo[b]) << "," << format_double(h.bin_hi[b]) << "," << format_double(h.mass[b])
          << "," << format_double(h.skewness) << "\n";
    paths.push_back(path);
  }
  return paths;
}

}  // namespace nrmi

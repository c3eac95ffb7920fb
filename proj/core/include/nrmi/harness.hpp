#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nrmi/intensity.hpp"
#include "nrmi/measures.hpp"
#include "nrmi/sampler.hpp"

namespace nrmi {

/// Coverage experiment settings. Text form is one `key = value` per line with
/// `#` comments; see serialize() for the full key set.
struct ExperimentConfig {
  std::vector<std::string> true_dists{"P1", "P2", "P3", "P4"};
  double a = 1.0;
  double sigma = 0.5;
  double theta = 1.0;
  std::string base = "normal:0,1";
  std::vector<std::size_t> sample_sizes{10, 100, 1000};
  std::size_t replications = 500;
  std::size_t posterior_draws_per_rep = 1000;
  std::string functional = "indicator:2,inf";
  double alpha = 0.025;
  double beta = 0.975;
  std::uint64_t seed = 20240601;
  std::optional<double> truncation_epsilon;
  std::string output_dir = ".";
  /// "exact" (set masses sampled directly) or "ferguson-klass".
  std::string sampler = "exact";

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  std::string serialize() const;
  /// FNV-1a of serialize() with output_dir blanked.
  std::uint64_t hash() const;
  /// Throws std::invalid_argument on violated invariants.
  void validate() const;

  IntensitySpec prior() const;
  Functional target() const;
  TruncationPolicy truncation(std::size_t n) const;
  PosteriorRoute route() const;
};

/// "normal:m,s", "exponential:r", "uniform:lo,hi".
ContinuousLaw parse_base_law(const std::string& id);
/// "indicator:lo,hi" (bounds may be inf/-inf), "constant:c", "identity".
Functional parse_functional(const std::string& id);

struct CoverageRow {
  std::string dist;
  std::size_t n;
  bool corrected;
  double coverage;
  double mc_stderr;
  std::size_t replications;
};

struct DensityHistogram {
  std::string dist;
  std::size_t n;
  std::vector<double> bin_lo;
  std::vector<double> bin_hi;
  std::vector<double> mass;
  double skewness;
};

/// Worker count: NRMI_LAB_THREADS when set to a positive integer, else hardware concurrency.
std::size_t worker_count();

/// Runs task(i) for i in [0, count) on worker_count() threads. Exceptions are
/// rethrown on the caller after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task);

/// Per-replication random stream keyed by (seed, dist, n, replication).
Rng replication_rng(std::uint64_t seed, const std::string& dist, std::size_t n, std::size_t replication);

/// Both uncorrected and corrected coverage for every (dist, n).
std::vector<CoverageRow> run_coverage(const ExperimentConfig& config);

/// Freedman–Diaconis histogram of posterior Pf draws for one dataset per
/// (dist, n), drawn from the replication-0 stream.
std::vector<DensityHistogram> run_density(const ExperimentConfig& config);

DensityHistogram histogram(std::vector<double> draws);
double sample_skewness(const std::vector<double>& xs);

/// Throws std::invalid_argument if the directory cannot be created or written.
void ensure_output_dir(const std::string& dir);

void write_coverage_csv(const std::vector<CoverageRow>& rows, const ExperimentConfig& config,
                        const std::string& path);
/// Writes density_{n}.csv (or density_{dist}_{n}.csv with several dists);
/// returns the paths written.
std::vector<std::string> write_density_csvs(const std::vector<DensityHistogram>& histograms,
                                            const ExperimentConfig& config);
/// "# config_hash=<hex>, seed=<seed>".
std::string provenance_line(const ExperimentConfig& config);

}  // namespace nrmi

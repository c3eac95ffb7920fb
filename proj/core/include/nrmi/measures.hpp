#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nrmi/random.hpp"

namespace nrmi {

struct Atom {
  double location;
  double weight;
};

/// Finite list of weighted atoms. A normalized measure is a realized random
/// probability measure; an unnormalized one is e.g. a truncated CRM.
class AtomicMeasure {
 public:
  AtomicMeasure() = default;

  /// Throws std::invalid_argument on negative weights, repeated locations, or
  /// (when `normalized`) a total weight outside 1 ± 1e-9.
  AtomicMeasure(std::vector<Atom> atoms, bool normalized);

  /// Rescales weights to sum to one.
  static AtomicMeasure normalize(std::vector<Atom> atoms);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  bool normalized() const noexcept { return normalized_; }
  double total_weight() const noexcept;
  std::size_t size() const noexcept { return atoms_.size(); }

 private:
  std::vector<Atom> atoms_;
  bool normalized_ = false;
};

/// Distinct values of a sample with their multiplicities, in first-appearance order.
class Partition {
 public:
  Partition(std::vector<double> distinct_values, std::vector<std::size_t> multiplicities);

  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<std::size_t>& counts() const noexcept { return counts_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t clusters() const noexcept { return values_.size(); }

 private:
  std::vector<double> values_;
  std::vector<std::size_t> counts_;
  std::size_t n_ = 0;
};

/// Groups a sample by exact value equality. Throws "empty sample".
Partition partition_of(std::span<const double> sample);

/// Half-open interval [lo, hi); lo may be -inf and hi may be +inf.
struct Interval {
  double lo;
  double hi;
  bool contains(double x) const noexcept { return lo <= x && x < hi; }
};

/// Absolutely continuous law on the real line (used for the base measure H and
/// for continuous true distributions).
struct ContinuousLaw {
  std::string name;
  std::function<double(double)> cdf;
  std::function<double(double)> quantile;

  double sample(Rng& rng) const;
  /// Draw from the law restricted to [lo, hi) by inverse CDF.
  double sample_within(const Interval& cell, Rng& rng) const;
  double mass(const Interval& cell) const;

  static ContinuousLaw standard_normal();
  static ContinuousLaw normal(double mean, double sd);
  static ContinuousLaw exponential(double rate);
  static ContinuousLaw uniform(double lo, double hi);
};

/// Measurable set used by the moment formulas: the whole line, a finite union of
/// half-open intervals, or a finite set of points.
class SetDescriptor {
 public:
  enum class Kind { Whole, Intervals, Atoms };

  static SetDescriptor whole();
  static SetDescriptor interval(double lo, double hi);
  static SetDescriptor union_of(std::vector<Interval> pieces);
  static SetDescriptor atoms(std::vector<double> points);

  Kind kind() const noexcept { return kind_; }
  const std::vector<Interval>& intervals() const noexcept { return intervals_; }
  const std::vector<double>& points() const noexcept { return points_; }

  bool contains(double x) const noexcept;
  /// H(A) for a non-atomic H.
  double base_mass(const ContinuousLaw& h) const;
  /// H(A ∩ cell).
  double base_mass_within(const ContinuousLaw& h, const Interval& cell) const;
  bool disjoint_from(const SetDescriptor& other) const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::Whole;
  std::vector<Interval> intervals_;
  std::vector<double> points_;
};

/// Real function on the sample space. Indicator functionals remember their set
/// so expectations under continuous laws can use the CDF.
struct Functional {
  std::string name;
  std::function<double(double)> eval;
  std::optional<SetDescriptor> indicator_of;
  std::optional<double> sup_norm;

  double operator()(double x) const { return eval(x); }

  static Functional indicator(double lo, double hi);
  static Functional indicator(SetDescriptor set);
  static Functional constant(double c);
  static Functional identity();
  static Functional custom(std::string name, std::function<double(double)> fn);
};

/// Σ weight_i f(location_i).
double integrate(const AtomicMeasure& measure, const Functional& f);

/// k^{-exponent} / ζ(exponent). Throws "non-summable" when exponent <= 1.
double power_law_pmf(double exponent, std::size_t k);

/// Data-generating distribution P0.
class TrueDistribution {
 public:
  struct FiniteDiscrete {
    std::vector<double> locations;
    std::vector<double> pmf;
  };
  struct PowerLaw {
    double exponent;
  };
  struct Continuous {
    ContinuousLaw law;
  };
  using Kind = std::variant<FiniteDiscrete, PowerLaw, Continuous>;

  static TrueDistribution finite(std::string id, std::vector<double> locations,
                                 std::vector<double> weights);
  static TrueDistribution power_law(std::string id, double exponent);
  static TrueDistribution continuous(std::string id, ContinuousLaw law);

  /// The four discrete laws of the coverage experiment, and Exp(1).
  static TrueDistribution p1();
  static TrueDistribution p2();
  static TrueDistribution p3();
  static TrueDistribution p4();
  static TrueDistribution by_id(const std::string& id);

  const std::string& id() const noexcept { return id_; }
  const Kind& kind() const noexcept { return kind_; }
  double normalizer() const noexcept { return normalizer_; }
  bool discrete() const noexcept;

  double sample(Rng& rng) const;
  std::vector<double> sample(std::size_t n, Rng& rng) const;

  /// P0 f. Indicator functionals are exact; other functionals on a power law are
  /// summed until the remaining mass is below 1e-12 (bounded f assumed beyond).
  double expectation(const Functional& f) const;

  /// Finite discrete laws as a normalized atomic measure.
  AtomicMeasure as_measure() const;

 private:
  TrueDistribution(std::string id, Kind kind, double normalizer);

  std::string id_;
  Kind kind_;
  double normalizer_ = 1.0;
  // Inverse-CDF table for the power-law head; the tail uses rejection.
  std::vector<double> head_cdf_;
};

}  // namespace nrmi

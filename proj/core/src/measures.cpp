#include "nrmi/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "nrmi/special.hpp"

namespace nrmi {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kPowerLawHead = 1u << 16;

}  // namespace

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms, bool normalized)
    : atoms_(std::move(atoms)), normalized_(normalized) {
  std::vector<double> locations;
  locations.reserve(atoms_.size());
  for (const auto& a : atoms_) {
    if (!(a.weight >= 0.0)) throw std::invalid_argument("negative atom weight");
    locations.push_back(a.location);
  }
  std::sort(locations.begin(), locations.end());
  if (std::adjacent_find(locations.begin(), locations.end()) != locations.end())
    throw std::invalid_argument("repeated atom location");
  if (normalized_ && std::fabs(total_weight() - 1.0) > 1e-9)
    throw std::invalid_argument("normalized measure does not sum to one");
}

AtomicMeasure AtomicMeasure::normalize(std::vector<Atom> atoms) {
  double total = 0.0;
  for (const auto& a : atoms) total += a.weight;
  if (!(total > 0.0)) throw std::invalid_argument("cannot normalize a null measure");
  for (auto& a : atoms) a.weight /= total;
  return AtomicMeasure(std::move(atoms), true);
}

double AtomicMeasure::total_weight() const noexcept {
  double total = 0.0;
  for (const auto& a : atoms_) total += a.weight;
  return total;
}

Partition::Partition(std::vector<double> distinct_values, std::vector<std::size_t> multiplicities)
    : values_(std::move(distinct_values)), counts_(std::move(multiplicities)) {
  if (values_.size() != counts_.size())
    throw std::invalid_argument("partition: values and multiplicities differ in length");
  if (values_.empty()) throw std::invalid_argument("empty sample");
  for (auto c : counts_) {
    if (c == 0) throw std::invalid_argument("partition: zero multiplicity");
    n_ += c;
  }
  std::vector<double> sorted = values_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("partition: repeated distinct value");
}

Partition partition_of(std::span<const double> sample) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  std::unordered_map<double, std::size_t> index;
  std::vector<double> values;
  std::vector<std::size_t> counts;
  for (double x : sample) {
    auto [it, inserted] = index.try_emplace(x, values.size());
    if (inserted) {
      values.push_back(x);
      counts.push_back(1);
    } else {
      ++counts[it->second];
    }
  }
  return Partition(std::move(values), std::move(counts));
}

// ---------------------------------------------------------------------------
// Continuous laws

double ContinuousLaw::sample(Rng& rng) const { return quantile(uniform_open01(rng)); }

double ContinuousLaw::sample_within(const Interval& cell, Rng& rng) const {
  const double lo = std::isinf(cell.lo) ? 0.0 : cdf(cell.lo);
  const double hi = std::isinf(cell.hi) ? 1.0 : cdf(cell.hi);
  const double p = lo + (hi - lo) * uniform_open01(rng);
  return std::clamp(quantile(p), cell.lo, std::nextafter(cell.hi, -kInf));
}

double ContinuousLaw::mass(const Interval& cell) const {
  if (!(cell.hi > cell.lo)) return 0.0;
  const double lo = (cell.lo == -kInf) ? 0.0 : cdf(cell.lo);
  const double hi = (cell.hi == kInf) ? 1.0 : cdf(cell.hi);
  return std::max(0.0, hi - lo);
}

ContinuousLaw ContinuousLaw::standard_normal() { return normal(0.0, 1.0); }

ContinuousLaw ContinuousLaw::normal(double mean, double sd) {
  if (!(sd > 0.0)) throw std::invalid_argument("normal: sd must be positive");
  boost::math::normal_distribution<double> d(mean, sd);
  std::ostringstream name;
  name << "normal(" << mean << "," << sd << ")";
  return ContinuousLaw{
      name.str(),
      [d](double x) {
        if (x == -kInf) return 0.0;
        if (x == kInf) return 1.0;
        return boost::math::cdf(d, x);
      },
      [d](double p) {
        if (p <= 0.0) return -kInf;
        if (p >= 1.0) return kInf;
        return boost::math::quantile(d, p);
      }};
}

ContinuousLaw ContinuousLaw::exponential(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be positive");
  std::ostringstream name;
  name << "exponential(" << rate << ")";
  return ContinuousLaw{name.str(),
                       [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); },
                       [rate](double p) {
                         if (p <= 0.0) return 0.0;
                         if (p >= 1.0) return kInf;
                         return -std::log1p(-p) / rate;
                       }};
}

ContinuousLaw ContinuousLaw::uniform(double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("uniform: empty support");
  std::ostringstream name;
  name << "uniform(" << lo << "," << hi << ")";
  return ContinuousLaw{name.str(),
                       [lo, hi](double x) { return std::clamp((x - lo) / (hi - lo), 0.0, 1.0); },
                       [lo, hi](double p) { return lo + std::clamp(p, 0.0, 1.0) * (hi - lo); }};
}

// ---------------------------------------------------------------------------
// Sets

SetDescriptor SetDescriptor::whole() { return SetDescriptor{}; }

SetDescriptor SetDescriptor::interval(double lo, double hi) { return union_of({Interval{lo, hi}}); }

SetDescriptor SetDescriptor::union_of(std::vector<Interval> pieces) {
  SetDescriptor s;
  s.kind_ = Kind::Intervals;
  for (const auto& p : pieces) {
    if (std::isnan(p.lo) || std::isnan(p.hi)) throw std::invalid_argument("interval bound is NaN");
    if (p.hi > p.lo) s.intervals_.push_back(p);
  }
  std::sort(s.intervals_.begin(), s.intervals_.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < s.intervals_.size(); ++i) {
    if (s.intervals_[i].lo < s.intervals_[i - 1].hi)
      throw std::invalid_argument("union_of: overlapping intervals");
  }
  return s;
}

SetDescriptor SetDescriptor::atoms(std::vector<double> points) {
  SetDescriptor s;
  s.kind_ = Kind::Atoms;
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  s.points_ = std::move(points);
  return s;
}

bool SetDescriptor::contains(double x) const noexcept {
  switch (kind_) {
    case Kind::Whole:
      return true;
    case Kind::Intervals:
      return std::any_of(intervals_.begin(), intervals_.end(),
                         [x](const Interval& i) { return i.contains(x); });
    case Kind::Atoms:
      return std::binary_search(points_.begin(), points_.end(), x);
  }
  return false;
}

double SetDescriptor::base_mass(const ContinuousLaw& h) const {
  return base_mass_within(h, Interval{-kInf, kInf});
}

double SetDescriptor::base_mass_within(const ContinuousLaw& h, const Interval& cell) const {
  switch (kind_) {
    case Kind::Whole:
      return h.mass(cell);
    case Kind::Intervals: {
      double total = 0.0;
      for (const auto& piece : intervals_)
        total += h.mass(Interval{std::max(piece.lo, cell.lo), std::min(piece.hi, cell.hi)});
      return total;
    }
    case Kind::Atoms:
      return 0.0;
  }
  return 0.0;
}

bool SetDescriptor::disjoint_from(const SetDescriptor& other) const {
  if (kind_ == Kind::Whole || other.kind_ == Kind::Whole) return false;
  if (kind_ == Kind::Atoms) {
    return std::none_of(points_.begin(), points_.end(),
                        [&](double x) { return other.contains(x); });
  }
  if (other.kind_ == Kind::Atoms) return other.disjoint_from(*this);
  for (const auto& a : intervals_)
    for (const auto& b : other.intervals_)
      if (std::max(a.lo, b.lo) < std::min(a.hi, b.hi)) return false;
  return true;
}

std::string SetDescriptor::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::Whole:
      out << "R";
      break;
    case Kind::Intervals:
      for (std::size_t i = 0; i < intervals_.size(); ++i)
        out << (i ? " U " : "") << "[" << intervals_[i].lo << "," << intervals_[i].hi << ")";
      if (intervals_.empty()) out << "{}";
      break;
    case Kind::Atoms:
      out << "{";
      for (std::size_t i = 0; i < points_.size(); ++i) out << (i ? "," : "") << points_[i];
      out << "}";
      break;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Functionals

Functional Functional::indicator(double lo, double hi) {
  return indicator(SetDescriptor::interval(lo, hi));
}

Functional Functional::indicator(SetDescriptor set) {
  Functional f;
  f.name = "indicator" + set.describe();
  f.eval = [set](double x) { return set.contains(x) ? 1.0 : 0.0; };
  f.indicator_of = std::move(set);
  f.sup_norm = 1.0;
  return f;
}

Functional Functional::constant(double c) {
  Functional f;
  f.name = "constant";
  f.eval = [c](double) { return c; };
  f.sup_norm = std::fabs(c);
  return f;
}

Functional Functional::identity() {
  Functional f;
  f.name = "identity";
  f.eval = [](double x) { return x; };
  return f;
}

Functional Functional::custom(std::string name, std::function<double(double)> fn) {
  Functional f;
  f.name = std::move(name);
  f.eval = std::move(fn);
  return f;
}

double integrate(const AtomicMeasure& measure, const Functional& f) {
  double total = 0.0;
  for (const auto& a : measure.atoms()) total += a.weight * f(a.location);
  return total;
}

double power_law_pmf(double exponent, std::size_t k) {
  if (!(exponent > 1.0)) throw std::invalid_argument("non-summable");
  if (k == 0) throw std::invalid_argument("power_law_pmf: k must be positive");
  return std::pow(static_cast<double>(k), -exponent) / special::riemann_zeta(exponent);
}

// ---------------------------------------------------------------------------
// True distributions

TrueDistribution::TrueDistribution(std::string id, Kind kind, double normalizer)
    : id_(std::move(id)), kind_(std::move(kind)), normalizer_(normalizer) {}

TrueDistribution TrueDistribution::finite(std::string id, std::vector<double> locations,
                                          std::vector<double> weights) {
  if (locations.empty() || locations.size() != weights.size())
    throw std::invalid_argument("finite distribution: bad support");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("finite distribution: negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("finite distribution: zero mass");
  for (double& w : weights) w /= total;
  std::vector<double> sorted = locations;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("finite distribution: repeated location");
  return TrueDistribution(std::move(id), FiniteDiscrete{std::move(locations), std::move(weights)},
                          total);
}

TrueDistribution TrueDistribution::power_law(std::string id, double exponent) {
  if (!(exponent > 1.0)) throw std::invalid_argument("non-summable");
  TrueDistribution d(std::move(id), PowerLaw{exponent}, special::riemann_zeta(exponent));
  d.head_cdf_.resize(kPowerLawHead);
  double acc = 0.0;
  for (std::size_t k = 1; k <= kPowerLawHead; ++k) {
    acc += std::pow(static_cast<double>(k), -exponent);
    d.head_cdf_[k - 1] = acc / d.normalizer_;
  }
  return d;
}

TrueDistribution TrueDistribution::continuous(std::string id, ContinuousLaw law) {
  return TrueDistribution(std::move(id), Continuous{std::move(law)}, 1.0);
}

TrueDistribution TrueDistribution::p1() {
  return finite("P1", {1, 2, 3, 4, 5}, {0.2, 0.2, 0.2, 0.3, 0.1});
}
TrueDistribution TrueDistribution::p2() { return power_law("P2", 3.0); }
TrueDistribution TrueDistribution::p3() { return power_law("P3", 2.0); }
TrueDistribution TrueDistribution::p4() { return power_law("P4", 1.5); }

TrueDistribution TrueDistribution::by_id(const std::string& id) {
  if (id == "P1") return p1();
  if (id == "P2") return p2();
  if (id == "P3") return p3();
  if (id == "P4") return p4();
  if (id == "Exp1") return continuous("Exp1", ContinuousLaw::exponential(1.0));
  if (id == "N01") return continuous("N01", ContinuousLaw::standard_normal());
  const std::string prefix = "powerlaw:";
  if (id.rfind(prefix, 0) == 0) return power_law(id, std::stod(id.substr(prefix.size())));
  throw std::invalid_argument("unknown true distribution '" + id + "'");
}

bool TrueDistribution::discrete() const noexcept {
  return !std::holds_alternative<Continuous>(kind_);
}

double TrueDistribution::sample(Rng& rng) const {
  if (const auto* fd = std::get_if<FiniteDiscrete>(&kind_)) {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < fd->pmf.size(); ++i) {
      acc += fd->pmf[i];
      if (u < acc) return fd->locations[i];
    }
    return fd->locations.back();
  }
  if (const auto* pl = std::get_if<PowerLaw>(&kind_)) {
    const double u = uniform01(rng);
    if (u < head_cdf_.back()) {
      const auto it = std::upper_bound(head_cdf_.begin(), head_cdf_.end(), u);
      return static_cast<double>(it - head_cdf_.begin() + 1);
    }
    // Tail k > head: Pareto proposal floor(X), X ∝ x^{-s} on [head + 1, ∞).
    const double s = pl->exponent;
    const double start = static_cast<double>(kPowerLawHead + 1);
    const double bound = std::pow(1.0 + 1.0 / start, s);
    for (;;) {
      const double x = start * std::pow(uniform_open01(rng), -1.0 / (s - 1.0));
      const double k = std::floor(x);
      const double ratio = (s - 1.0) / (k * -std::expm1((1.0 - s) * std::log1p(1.0 / k)));
      if (uniform01(rng) * bound <= ratio) return k;
    }
  }
  return std::get<Continuous>(kind_).law.sample(rng);
}

std::vector<double> TrueDistribution::sample(std::size_t n, Rng& rng) const {
  std::vector<double> out(n);
  for (auto& x : out) x = sample(rng);
  return out;
}

double TrueDistribution::expectation(const Functional& f) const {
  if (const auto* fd = std::get_if<FiniteDiscrete>(&kind_)) {
    double total = 0.0;
    for (std::size_t i = 0; i < fd->pmf.size(); ++i) total += fd->pmf[i] * f(fd->locations[i]);
    return total;
  }
  if (const auto* pl = std::get_if<PowerLaw>(&kind_)) {
    const double s = pl->exponent;
    if (f.indicator_of && f.indicator_of->kind() == SetDescriptor::Kind::Intervals) {
      double mass = 0.0;
      for (const auto& piece : f.indicator_of->intervals()) {
        const double first = std::max(1.0, std::ceil(piece.lo));
        if (!(first < piece.hi)) continue;
        double upper = special::zeta_tail(s, first);
        if (piece.hi != kInf) {
          const double last = std::ceil(piece.hi) - 1.0;
          if (last < first) continue;
          upper -= special::zeta_tail(s, last + 1.0);
        }
        mass += upper;
      }
      return mass / normalizer_;
    }
    double total = 0.0;
    double k = 1.0;
    for (; k < 1e7; k += 1.0) {
      total += f(k) * std::pow(k, -s);
      if (special::zeta_tail(s, k + 1.0) < 1e-12 * normalizer_) break;
    }
    total += f(k + 1.0) * special::zeta_tail(s, k + 1.0);
    return total / normalizer_;
  }
  const auto& law = std::get<Continuous>(kind_).law;
  if (f.indicator_of) {
    const auto& set = *f.indicator_of;
    if (set.kind() == SetDescriptor::Kind::Atoms) return 0.0;
    return set.base_mass(law);
  }
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate([&](double p) { return f(law.quantile(p)); }, 0.0, 1.0);
}

AtomicMeasure TrueDistribution::as_measure() const {
  const auto* fd = std::get_if<FiniteDiscrete>(&kind_);
  if (!fd) throw std::invalid_argument("as_measure: only finite discrete laws are atomic measures");
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < fd->pmf.size(); ++i) atoms.push_back({fd->locations[i], fd->pmf[i]});
  return AtomicMeasure(std::move(atoms), true);
}

}  // namespace nrmi

#pragma once

// Random-variable families used to exercise the bounds: iid draws from a
// simple distribution, the subset-product family (pairwise independent but
// not mutually independent), and the zeta-weighted heavy-tail family
// P(X = n) = c / n^(3 + delta).

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "slln/rng.hpp"

namespace slln {

// ---------------------------------------------------------------------------
// Zeta constants and the heavy-tail inverse CDF

/// Riemann zeta for s > 1: direct sum of n^-s for n < 10^6 plus an
/// Euler-Maclaurin tail; absolute error well below 1e-12.
double zeta(double s);

struct ZetaConstants {
  double delta = 0.0;
  double c = 0.0;      // 1 / zeta(3 + delta)
  double mu = 0.0;     // c zeta(2 + delta)
  double omega = 0.0;  // c / (2 3^(2+delta) (2 + delta))
  double w = 0.0;      // c / (3^(2+delta) (2 + delta))
  double second_moment = 0.0;  // E X^2 = c zeta(1 + delta)
};

ZetaConstants zeta_constants(double delta);

/// Cumulative table for P(X = n) = c / n^(3+delta), n = 1..cutoff. The mass
/// beyond the cutoff (< 1e-12) is folded into the last atom.
class HeavyTailTable {
 public:
  explicit HeavyTailTable(const ZetaConstants& consts);

  /// Smallest n with CDF(n) > u, for u in [0, 1).
  std::int64_t sample(double u) const;

  const ZetaConstants& constants() const { return consts_; }
  std::int64_t cutoff() const { return static_cast<std::int64_t>(cdf_.size()); }
  double cdf(std::int64_t n) const { return cdf_.at(static_cast<std::size_t>(n - 1)); }
  /// Probability mass moved onto the last atom.
  double residual_mass() const { return residual_mass_; }
  /// Bound on the downward shift of the mean caused by the folding.
  double mean_bias_bound() const { return mean_bias_bound_; }

 private:
  ZetaConstants consts_;
  std::vector<double> cdf_;
  double residual_mass_ = 0.0;
  double mean_bias_bound_ = 0.0;
};

/// One-off inverse-CDF draw; builds a table per call. Throws
/// std::invalid_argument for u outside [0, 1).
std::int64_t heavy_tail_sample(const ZetaConstants& consts, double u);

// ---------------------------------------------------------------------------
// Subset-product family

/// Bit masks of the nonempty subsets of {1..k} ordered by cardinality, then
/// lexicographically by sorted elements. Element i maps to bit i-1.
std::vector<std::uint32_t> subset_masks(int k);

/// X_S = prod_{i in S} signs[i-1] over the first `length` subsets in
/// canonical order. signs must be +1/-1.
std::vector<int> subset_products(std::span<const int> signs, std::size_t length);

/// Draws k Rademacher signs from (seed, stream) and returns the first
/// `length` subset products. Throws if length > 2^k - 1.
std::vector<int> pairwise_family_path(int k, std::size_t length, std::uint64_t seed, std::uint64_t stream = 0);

// ---------------------------------------------------------------------------
// Family descriptions

struct Rademacher {
  bool operator==(const Rademacher&) const = default;
};
struct UniformDist {
  double a = 0.0;
  double b = 1.0;
  bool operator==(const UniformDist&) const = default;
};
struct DiscreteDist {
  std::vector<double> values;
  std::vector<double> probs;
  bool operator==(const DiscreteDist&) const = default;
};
using Distribution = std::variant<Rademacher, UniformDist, DiscreteDist>;

struct IidFamily {
  Distribution dist;
  bool operator==(const IidFamily&) const = default;
};
struct PairwiseSubsetProduct {
  int k = 10;
  bool operator==(const PairwiseSubsetProduct&) const = default;
};
struct HeavyTailZeta {
  double delta = 1.0;
  bool centered = true;
  bool operator==(const HeavyTailZeta&) const = default;
};
using FamilySpec = std::variant<IidFamily, PairwiseSubsetProduct, HeavyTailZeta>;

/// Exact moments of one variable of the family.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double abs_mean = 0.0;  // E|X|
};

Moments family_moments(const FamilySpec& spec);

/// Longest path the family supports (2^k - 1 for the subset products).
std::uint64_t family_max_length(const FamilySpec& spec);

/// Largest |X| if the support is bounded, else +inf.
double family_support_bound(const FamilySpec& spec);

/// sup |X - c| over the support; +inf if unbounded.
double family_deviation_bound(const FamilySpec& spec, double c);

/// Parses "family=heavy_tail delta=1 centered=true" style key=value text. A
/// leading bare word is taken as the family name. Throws
/// std::invalid_argument on unknown keys or malformed values.
FamilySpec parse_family(std::string_view text);

/// Canonical key=value form; parse_family(to_string(f)) == f.
std::string to_string(const FamilySpec& spec);

// ---------------------------------------------------------------------------
// Path samplers

class RademacherSampler {
 public:
  void reset(std::uint64_t seed, std::uint64_t stream) {
    rng_ = CounterRng(seed, stream);
    index_ = 0;
  }
  double next() {
    if ((index_ & 63) == 0) bits_ = rng_.word(index_ >> 6);
    const double v = ((bits_ >> (index_ & 63)) & 1ULL) ? -1.0 : 1.0;
    ++index_;
    return v;
  }
  /// Word w carries the signs of steps 64w+1 .. 64w+64; a set bit is -1.
  std::uint64_t word(std::uint64_t w) const { return rng_.word(w); }

 private:
  CounterRng rng_;
  std::uint64_t index_ = 0;
  std::uint64_t bits_ = 0;
};

class UniformSampler {
 public:
  explicit UniformSampler(UniformDist d) : a_(d.a), width_(d.b - d.a) {}
  void reset(std::uint64_t seed, std::uint64_t stream) { stream_ = RandomStream(seed, stream); }
  double next() { return a_ + width_ * stream_.next_uniform(); }

 private:
  double a_;
  double width_;
  RandomStream stream_;
};

class DiscreteSampler {
 public:
  explicit DiscreteSampler(const DiscreteDist& d);
  void reset(std::uint64_t seed, std::uint64_t stream) { stream_ = RandomStream(seed, stream); }
  double next();

 private:
  std::shared_ptr<const std::vector<double>> cdf_;
  std::shared_ptr<const std::vector<double>> values_;
  RandomStream stream_;
};

class HeavyTailSampler {
 public:
  HeavyTailSampler(std::shared_ptr<const HeavyTailTable> table, bool centered)
      : table_(std::move(table)), shift_(centered ? table_->constants().mu : 0.0) {}
  void reset(std::uint64_t seed, std::uint64_t stream) { stream_ = RandomStream(seed, stream); }
  double next() { return static_cast<double>(table_->sample(stream_.next_uniform())) - shift_; }

 private:
  std::shared_ptr<const HeavyTailTable> table_;
  double shift_;
  RandomStream stream_;
};

class PairwiseSampler {
 public:
  explicit PairwiseSampler(int k);
  void reset(std::uint64_t seed, std::uint64_t stream);
  double next();

 private:
  int k_;
  std::shared_ptr<const std::vector<std::uint32_t>> masks_;
  std::uint32_t negative_ = 0;
  std::size_t index_ = 0;
};

using PathSampler =
    std::variant<RademacherSampler, UniformSampler, DiscreteSampler, HeavyTailSampler, PairwiseSampler>;

/// Sampler prototype for a family; copies share the immutable tables.
PathSampler make_sampler(const FamilySpec& spec);

/// Deterministic in (seed, stream): the first `length` values of the path.
/// Centered heavy-tail families emit X - mu.
std::vector<double> sample_path(const FamilySpec& spec, std::size_t length, std::uint64_t seed,
                                std::uint64_t stream);

}  // namespace slln

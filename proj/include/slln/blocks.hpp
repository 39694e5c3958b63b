#pragma once

// Block/subsequence combinatorics behind the subsequence-to-full-sequence
// argument: geometric blocks [alpha^m, alpha^(m+1)) split by which
// delta-band z_n/n falls in, their extreme members k^-(m), k^+(m), and the
// five-term sandwich that bounds (S_m - z_m)/m by the block endpoints.
//
// Everything here is an exhaustive scan over integer ranges. These routines
// validate the combinatorics on concrete sequences and are not used on the
// rate computation path.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace slln {

struct BlockContext {
  double alpha;
  double delta;
  double W;
  /// z[0] = 0 and z[n] = z_n for n = 1..N (partial sums of the means).
  std::vector<double> z;

  /// Checks alpha > 1, delta > 0, W > 0 and 0 <= z_n/n <= W.
  void validate() const;

  std::int64_t horizon() const { return static_cast<std::int64_t>(z.size()) - 1; }

  /// floor(W / delta)
  std::int64_t band_count() const;

  /// The band s in [0, band_count()] with z_n/n in [s delta, (s+1) delta).
  std::int64_t band_of(std::int64_t n) const;
};

/// Builds a context from per-term means: z_n = mu_1 + ... + mu_n.
BlockContext make_block_context(double alpha, double delta, double W, std::span<const double> means);

/// Integer range [ceil(alpha^m), ceil(alpha^(m+1)) - 1].
struct BlockRange {
  std::int64_t first;
  std::int64_t last;
};
BlockRange block_range(double alpha, std::int64_t m);

/// Exponent p with alpha^p <= n < alpha^(p+1).
std::int64_t block_exponent(double alpha, std::int64_t n);

/// { n : alpha^m <= n < alpha^(m+1), z_n/n in [s delta, (s+1) delta) }.
/// Throws std::out_of_range if the block extends past ctx.horizon().
std::vector<std::int64_t> block_members(const BlockContext& ctx, std::int64_t s, std::int64_t m);

struct KPair {
  std::int64_t minus;
  std::int64_t plus;
  bool operator==(const KPair&) const = default;
};

/// (min, max) of the block, or (floor(alpha^m), floor(alpha^m)) when empty.
KPair k_pm(const BlockContext& ctx, std::int64_t s, std::int64_t m);

enum class SandwichSide { kNone, kLower, kUpper };

struct SandwichResult {
  bool holds = true;
  SandwichSide violated = SandwichSide::kNone;
  double lower = 0.0;   // -delta - (1 - 1/alpha) W + (S_k- - z_k-) / (alpha k-)
  double middle = 0.0;  // (S_m - z_m) / m
  double upper = 0.0;   // alpha (S_k+ - z_k+) / k+ + (alpha - 1) W + delta
  std::int64_t band = 0;
  std::int64_t exponent = 0;
  KPair k{0, 0};
  bool block_empty = false;
  bool block_truncated = false;  // block cut at the end of the sequence
};

/// Evaluates the sandwich for index m. X is indexed from 1 (X[0] is X_1);
/// ctx.z must cover at least X.size() terms. The band defaults to the one
/// containing z_m/m; passing another band exercises the empty-block case.
/// Comparisons allow 1e-12 relative slack for rounding.
SandwichResult sandwich_check(std::span<const double> X, const BlockContext& ctx, std::int64_t m,
                              std::optional<std::int64_t> band = std::nullopt);

}  // namespace slln

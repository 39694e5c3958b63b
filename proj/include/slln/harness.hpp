#pragma once

// Monte-Carlo estimation of the sup-tail probability
//   P*(n, eps) = P(sup_{m >= n} |S_m/m - c_m| > eps)
// and empirical checks of the analytic bounds against it.
//
// The sup is truncated at a horizon M, so every estimate is of
// P(max_{n <= m <= M} ...), which is never larger than P*. Estimates are low
// in expectation: conservative when checking a lower bound, merely evidence
// when checking an upper bound.
//
// Path i always uses random stream i, and workers only add integer hit
// counts, so results do not depend on the worker count.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "slln/families.hpp"
#include "slln/kronecker.hpp"
#include "slln/rate.hpp"

namespace slln {

enum class Center {
  kZero,        // c_m = 0
  kFamilyMean,  // c_m = E X
};

struct SupTailQuery {
  FamilySpec family = IidFamily{Rademacher{}};
  std::int64_t n = 1;
  double eps = 1.0;
  std::int64_t horizon = 32;
  std::uint64_t paths = 1000;
  std::uint64_t seed = 1;
  Center center = Center::kZero;

  /// n >= 1, eps > 0, horizon >= n, paths >= 100, n within the family length.
  void validate() const;
};

struct RunOptions {
  unsigned workers = 0;  // 0: default_workers()
  double budget = 1e10;  // cap on paths * horizon
};

/// SLLN_WORKERS if set to a positive integer, else the hardware concurrency.
unsigned default_workers();

class BudgetError : public std::runtime_error {
 public:
  BudgetError(double required, double budget);
  double required() const { return required_; }
  double budget() const { return budget_; }

 private:
  double required_;
  double budget_;
};

struct SupTailEstimate {
  std::uint64_t hits = 0;
  std::uint64_t paths = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;   // 95% Clopper-Pearson
  double ci_high = 1.0;
  std::int64_t horizon_used = 0;
  /// p_hat estimates the truncated sup and is biased low. Always set.
  bool truncation_note = true;
  /// horizon_sweep only: false when the budget ran out first.
  bool stabilized = true;
};

/// Simulates q.paths paths up to the horizon (clamped to the family length).
/// Throws BudgetError when paths * horizon exceeds options.budget.
SupTailEstimate estimate_sup_tail(const SupTailQuery& q, const RunOptions& options = {});

/// Per path, the largest m <= horizon with |S_m/m - c| > eps, or 0. Then
/// the hit count for any start n <= horizon is #{last >= n}.
std::vector<std::int64_t> last_hit_indices(const SupTailQuery& q, const RunOptions& options = {});

/// Doubles the horizon from q.horizon until successive hit counts differ by
/// less than 2 sqrt(hits) (or not at all), or the budget is exhausted.
SupTailEstimate horizon_sweep(const SupTailQuery& q, const RunOptions& options = {}, int max_doublings = 16);

/// sigma2 = Var X and tau = E|X - c| for the centred family. Throws
/// HypothesisError when center is zero but the family mean is not.
MomentProfile centered_profile(const FamilySpec& family, Center center);

enum class Verdict { kVerified, kViolated, kInconclusive, kVacuous };

std::string to_string(Verdict v);

struct BoundReport {
  double analytic = 0.0;
  SupTailEstimate empirical;
  Verdict verdict = Verdict::kInconclusive;
  /// verify_threshold only: the computed n*.
  double n_star = 0.0;
  std::string note;
};

/// Upper-bound check against slln_upper_bound(n, eps, profile). The profile
/// must dominate the family's variance (and E|X| for mean-zero families).
BoundReport verify_upper(const SupTailQuery& q, const MomentProfile& profile, const RunOptions& options = {});

/// Lower-bound check for the centered heavy-tail family against
/// omega / n^(1 + delta). Needs 0 < eps <= 1. horizon 0 means 32 n.
BoundReport verify_lower(double delta, std::int64_t n, double eps, std::uint64_t paths, std::uint64_t seed,
                         const RunOptions& options = {}, std::int64_t horizon = 0);

struct BaumKatzPoint {
  std::int64_t N = 0;
  double empirical = 0.0;  // sum_{n<=N} n^r p_hat(n)
  double ci_low = 0.0;     // same sum over the per-n interval ends
  double ci_high = 0.0;
  double majorant = 0.0;          // sum_{n<=N} n^r min(1, slln_upper_bound(n))
  double majorant_literal = 0.0;  // C sum_{n<=N} n^(r-1), C = n * slln_upper_bound(n)
};

struct BaumKatzResult {
  double r = 0.0;
  double eps = 0.0;
  std::int64_t horizon = 0;
  std::uint64_t paths = 0;
  MomentProfile profile;
  std::vector<BaumKatzPoint> points;  // N = 1, 2, 4, ..., and N_max
};

/// Partial Baum-Katz sums. All n share one set of paths with horizon
/// 32 N_max, read off through last_hit_indices. Needs r < 0.
BaumKatzResult baum_katz_partial(double r, double eps, const FamilySpec& family, std::int64_t N_max,
                                 std::uint64_t paths, std::uint64_t seed, const RunOptions& options = {},
                                 Center center = Center::kFamilyMean);

enum class ThresholdKind { kChenSung, kCsorgo };

/// Computes n* for the chosen threshold and, if paths * 32 n* fits the
/// budget, estimates the sup-tail at n = n* with center = family mean.
/// Verified when ci_high <= lambda; inconclusive when n* is out of budget.
BoundReport verify_threshold(ThresholdKind kind, const SeriesSpec& spec, double W, double eps, double lambda,
                             const FamilySpec& family, std::uint64_t paths, std::uint64_t seed,
                             const RunOptions& options = {});

}  // namespace slln

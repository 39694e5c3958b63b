#pragma once

// Series machinery for the Chen-Sung type strong law: the subsequence
// sum bound, a quantitative Kronecker lemma, the chi rate for the
// subsequence deviation series, and the resulting thresholds.

#include <cstdint>
#include <functional>
#include <span>

#include "slln/rate.hpp"

namespace slln {

/// gamma_n with E|S_n - z_n|^p <= gamma_1 + ... + gamma_n.
struct SeriesSpec {
  std::function<double(std::int64_t)> gamma;
  double p = 2.0;
  /// Upper bound on sum_m gamma_m / m^p.
  double Gamma = 1.0;
  /// Rate for the tail sum_{m>n} gamma_m / m^p; must be strictly decreasing.
  Rate Psi;
};

/// gamma_m = g for all m, with the integral tail rate
///   Psi(lambda) = (g / ((p - 1) lambda))^(1/(p-1)).
/// Needs g > 0, p > 1 and Gamma >= g zeta(p).
SeriesSpec constant_series(double g, double p, double Gamma);

/// f with a_{f(omega)} >= omega, for a positive nondecreasing a_n -> inf.
/// Indices are carried as doubles since thresholds can exceed 2^63.
struct IndexDominator {
  std::function<double(double)> f;
  std::function<double(double)> a;
};

/// a_n = n^p with f_p(omega) = ceil(omega^(1/p)).
IndexDominator power_dominator(double p);

/// Rate for (1/a_n) sum_{i<=n} a_i x_i -> 0 given a rate phi for the
/// partial sums of a nonnegative series with sum < S:
///   eps -> max{ phi(eps/4), f(4 a_M S / eps) },  M = max(1, ceil(phi(eps/4))).
/// The result is a step function (nonincreasing, not strictly decreasing).
Rate kronecker_rate(Rate phi, IndexDominator dom, double S);

/// (1/a_n) sum_{i=1..n} a_i x_i with compensated summation. x[0] holds x_1.
double kronecker_oracle(std::span<const double> x, std::span<const double> a, std::int64_t n);

struct SumBound {
  double value = 0.0;         // first + second
  double first = 0.0;         // block-normalised partial sum of gamma
  double second = 0.0;        // scaled tail of gamma_m / m^p, summed to tail_upto
  std::int64_t block_end = 0;   // floor(alpha^(Q+2))
  std::int64_t tail_start = 0;  // floor(alpha^(Q+1)) + 1
  std::int64_t tail_upto = 0;
  /// Scaled bound on the omitted terms beyond tail_upto, from Psi.
  double truncated_tail_bound = 0.0;
};

/// Right-hand side of the subsequence sum bound
///   2^p alpha^2p / (eps^p B^p (alpha^p - 1)) sum_{m<=B} gamma_m
///   + 2^p alpha^2p / (eps^p (alpha^p - 1)) sum_{floor(alpha^(Q+1)) < m <= tail_upto} gamma_m / m^p
/// with B = floor(alpha^(Q+2)). Throws std::overflow_error if B is not an
/// exact integer in double precision.
SumBound sumbound_rhs(std::int64_t Q, double eps, double alpha, const SeriesSpec& spec, std::int64_t tail_upto);

/// Rate for the tail of the subsequence deviation series.
Rate chi_rate(double eps, double alpha, const SeriesSpec& spec);

/// Threshold n* for P(sup_{m>=n} |S_m/m - z_m/m| > eps) <= lambda: the
/// subsequence combinator applied to chi_rate, rounded up.
/// Hypotheses: 0 < eps <= 1, W >= 1, Gamma >= 1, Psi strictly decreasing.
double chen_sung_threshold(double eps, double lambda, const SeriesSpec& spec, double W);

/// The same threshold before the ceiling.
double chen_sung_composed(double eps, double lambda, const SeriesSpec& spec, double W);

/// Closed-form majorant A_p (W Gamma / (lambda eps^(p+1)))^(1/p) Psi(B_p lambda eps^(p+1) / W).
///
/// Constants come from bounding the composed threshold with alpha <= 4/3 and
/// alpha^p - 1 >= alpha - 1 = eps / (3W):
///   A_p = (4096/27) 48^(1/p),  B_p = 1 / (3 * 2^(p+4) * 3^p * (4/3)^(3p)).
/// The majorant covers the composed threshold only when both ceilings inside
/// the Kronecker step are absorbed by a factor of 2, which needs the inner
/// Psi value and Kronecker multiplier to be >= 1; `applicable` records that.
struct ClosedFormThreshold {
  double value = 0.0;
  double A_p = 0.0;
  double B_p = 0.0;
  bool applicable = false;
};
ClosedFormThreshold chen_sung_closed_form(double eps, double lambda, const SeriesSpec& spec, double W);

/// Pairwise independent mean-zero version: chen_sung_threshold(eps/2, lambda/2)
/// applied to the positive and negative parts. var_spec.p must be 2.
double csorgo_threshold(double eps, double lambda, const SeriesSpec& var_spec, double W);

}  // namespace slln

#pragma once

// Rates of convergence and the closed-form large-deviation bounds built
// from them.
//
// A rate maps a tolerance lambda > 0 to a real threshold N(lambda): the
// tracked quantity is within lambda of its limit for every index
// n >= N(lambda). Thresholds stay real-valued; callers take ceilings only
// where an integer index is needed.

#include <functional>
#include <stdexcept>
#include <string>

namespace slln {

/// Raised when an argument violates a hypothesis of the bound being
/// evaluated (e.g. eps > 1 for the Chen-Sung threshold).
class HypothesisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by invert_rate when rate(bracket_hi) still exceeds the target.
class BracketError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Monotonicity {
  kStrictlyDecreasing,
  kNonincreasing,  // step functions built from ceilings
};

class Rate {
 public:
  using Fn = std::function<double(double)>;

  Rate(Fn eval, Monotonicity monotonicity, double domain_floor = 0.0);

  /// Threshold for tolerance lambda; lambda must exceed domain_floor().
  double operator()(double lambda) const;

  bool strictly_decreasing() const {
    return monotonicity_ == Monotonicity::kStrictlyDecreasing;
  }
  Monotonicity monotonicity() const { return monotonicity_; }
  double domain_floor() const { return domain_floor_; }

 private:
  Fn eval_;
  Monotonicity monotonicity_;
  double domain_floor_;
};

/// n -> probability bound obtained by inverting a strictly decreasing rate.
class AsymptoticBound {
 public:
  explicit AsymptoticBound(std::function<double(double)> eval) : eval_(std::move(eval)) {}
  double operator()(double n) const { return eval_(n); }

 private:
  std::function<double(double)> eval_;
};

/// Moment data consumed by the bound formulas. Not every formula reads
/// every field.
struct MomentProfile {
  double sigma2 = 1.0;  // uniform variance bound
  double tau = 1.0;     // uniform bound on E|X_n|
  double W = 1.0;       // bound on z_n / n
  double Gamma = 1.0;   // bound on sum gamma_m / m^p
  double p = 2.0;       // moment order
  double mu = 1.0;      // per-variable mean bound (nonnegative families)

  /// Throws std::invalid_argument on negative or non-finite fields.
  void validate() const;
};

/// Solves rate(lambda) = n by bisection on (domain_floor, bracket_hi].
///
/// Returns the upper end of the final bracket, so rate(result) <= n always
/// holds and the pair (n, result) is a valid asymptotic bound. The result is
/// within 1e-9 * max(1, n) of the root in eval-space whenever the rate is
/// continuous; the loop is capped at 200 halvings.
double invert_rate(const Rate& rate, double n, double bracket_hi);

/// Wraps invert_rate so that the returned bound is n -> rate^{-1}(n).
AsymptoticBound to_asymptotic_bound(const Rate& rate, double bracket_hi);

/// Rate for the tail of the subsequence deviation series of nonnegative
/// pairwise independent variables with variance bound sigmaY2:
///   log_alpha(2 sigmaY2 / (lambda eps^2 (alpha - 1))) - 1, clamped at 0.
Rate geometric_tail_rate(double eps, double alpha, double sigmaY2);

/// Family of rates Lambda(eps, delta, alpha, lambda) indexed by the block
/// parameters; the subsequence combinator below consumes one of these.
using RateFamily = std::function<double(double eps, double delta, double alpha, double lambda)>;

/// Lifts a rate for the block-subsequence series to a rate for the full
/// sup-deviation probability: lambda -> alpha^(Lambda(eps/(3 alpha), eps/3,
/// alpha, lambda/2) + 1) with alpha = 1 + eps/(3W).
Rate genquant_threshold(double eps, double W, RateFamily Lambda,
                        Monotonicity inherited = Monotonicity::kStrictlyDecreasing);

/// Closed form of genquant_threshold composed with geometric_tail_rate for
/// nonnegative variables with mean bound mu:
///   36 alpha^2 sigmaY2 / (lambda eps^2 (alpha - 1)),  alpha = 1 + eps/(3 mu).
Rate delta_rate(double eps, double mu, double sigmaY2);

/// Rate for P*(n, eps) of mean-zero pairwise independent variables with
/// E|X| <= tau and Var X <= sigma2 (positive/negative part reduction of
/// delta_rate): 288 alpha^2 sigma2 / (lambda eps^2 (alpha - 1)),
/// alpha = 1 + eps/(3 tau).
Rate pairwise_rate(double eps, double tau, double sigma2);

/// 1536 sigma^2 tau / (n eps^3) for eps <= tau, and
/// 1536 sigma^2 / (n eps tau) for eps > tau. May exceed 1.
double slln_upper_bound(double n, double eps, const MomentProfile& profile);

/// 2 sigma^2 / (n eps^2): the sup-tail bound for mutually independent
/// variables. Comparison line only.
double hajek_renyi_bound(double n, double eps, double sigma2);

}  // namespace slln

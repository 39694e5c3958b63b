#include "slln/rate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace slln {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be a positive finite real");
  }
}

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be a nonnegative finite real");
  }
}

Monotonicity strict_if(bool cond) {
  return cond ? Monotonicity::kStrictlyDecreasing : Monotonicity::kNonincreasing;
}

}  // namespace

Rate::Rate(Fn eval, Monotonicity monotonicity, double domain_floor)
    : eval_(std::move(eval)), monotonicity_(monotonicity), domain_floor_(domain_floor) {
  if (!eval_) throw std::invalid_argument("rate needs an evaluation function");
  require_nonnegative(domain_floor, "domain_floor");
}

double Rate::operator()(double lambda) const {
  if (!(lambda > domain_floor_)) {
    throw std::invalid_argument("rate evaluated at lambda <= domain floor");
  }
  return eval_(lambda);
}

void MomentProfile::validate() const {
  require_nonnegative(sigma2, "sigma2");
  require_positive(tau, "tau");
  require_positive(W, "W");
  require_positive(Gamma, "Gamma");
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must be >= 1");
  require_positive(mu, "mu");
}

double invert_rate(const Rate& rate, double n, double bracket_hi) {
  if (!rate.strictly_decreasing()) {
    throw std::invalid_argument("invert_rate needs a strictly decreasing rate");
  }
  require_nonnegative(n, "n");
  if (!(bracket_hi > rate.domain_floor())) {
    throw std::invalid_argument("bracket_hi must exceed the rate's domain floor");
  }
  if (rate(bracket_hi) > n) {
    throw BracketError("rate(bracket_hi) > n: enlarge the bracket");
  }

  double lo = rate.domain_floor();
  double hi = bracket_hi;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (rate(mid) > n) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

AsymptoticBound to_asymptotic_bound(const Rate& rate, double bracket_hi) {
  return AsymptoticBound([rate, bracket_hi](double n) { return invert_rate(rate, n, bracket_hi); });
}

Rate geometric_tail_rate(double eps, double alpha, double sigmaY2) {
  require_positive(eps, "eps");
  if (!(alpha > 1.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be > 1");
  require_nonnegative(sigmaY2, "sigmaY2");
  const double log_alpha = std::log(alpha);
  return Rate(
      [=](double lambda) {
        const double arg = 2.0 * sigmaY2 / (lambda * eps * eps * (alpha - 1.0));
        if (arg <= 0.0) return 0.0;
        return std::max(0.0, std::log(arg) / log_alpha - 1.0);
      },
      strict_if(sigmaY2 > 0.0));
}

Rate genquant_threshold(double eps, double W, RateFamily Lambda, Monotonicity inherited) {
  require_positive(eps, "eps");
  require_positive(W, "W");
  if (!Lambda) throw std::invalid_argument("genquant_threshold needs a rate family");
  const double alpha = 1.0 + eps / (3.0 * W);
  return Rate(
      [=, Lambda = std::move(Lambda)](double lambda) {
        const double inner = Lambda(eps / (3.0 * alpha), eps / 3.0, alpha, lambda / 2.0);
        return std::pow(alpha, inner + 1.0);
      },
      inherited);
}

Rate delta_rate(double eps, double mu, double sigmaY2) {
  require_positive(eps, "eps");
  require_positive(mu, "mu");
  require_nonnegative(sigmaY2, "sigmaY2");
  const double alpha = 1.0 + eps / (3.0 * mu);
  return Rate(
      [=](double lambda) {
        return 36.0 * alpha * alpha * sigmaY2 / (lambda * eps * eps * (alpha - 1.0));
      },
      strict_if(sigmaY2 > 0.0));
}

Rate pairwise_rate(double eps, double tau, double sigma2) {
  require_positive(eps, "eps");
  require_positive(tau, "tau");
  require_nonnegative(sigma2, "sigma2");
  const double alpha = 1.0 + eps / (3.0 * tau);
  return Rate(
      [=](double lambda) {
        return 288.0 * alpha * alpha * sigma2 / (lambda * eps * eps * (alpha - 1.0));
      },
      strict_if(sigma2 > 0.0));
}

double slln_upper_bound(double n, double eps, const MomentProfile& profile) {
  require_positive(n, "n");
  require_positive(eps, "eps");
  require_positive(profile.tau, "tau");
  require_nonnegative(profile.sigma2, "sigma2");
  const double s2 = profile.sigma2;
  const double tau = profile.tau;
  if (eps <= tau) return 1536.0 * s2 * tau / (n * eps * eps * eps);
  return 1536.0 * s2 / (n * eps * tau);
}

double hajek_renyi_bound(double n, double eps, double sigma2) {
  require_positive(n, "n");
  require_positive(eps, "eps");
  require_nonnegative(sigma2, "sigma2");
  return 2.0 * sigma2 / (n * eps * eps);
}

}  // namespace slln

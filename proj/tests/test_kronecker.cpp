#include <doctest.h>

#include <cmath>
#include <random>

#include "models.hpp"
#include "oracles.hpp"
#include "slln/kronecker.hpp"
#include "slln/numeric.hpp"

using namespace slln;

namespace {

Rate dyadic_phi() {
  return Rate([](double e) { return std::max(0.0, std::ceil(std::log2(1.0 / e))); }, Monotonicity::kNonincreasing);
}

IndexDominator identity_dominator() {
  return {[](double w) { return std::max(1.0, std::ceil(w)); }, [](double n) { return n; }};
}

std::vector<double> dyadic(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::ldexp(1.0, -static_cast<int>(i + 1));
  return x;
}

std::vector<double> iota_a(std::size_t n) {
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = static_cast<double>(i + 1);
  return a;
}

SeriesSpec unit_series(double Gamma = 1.7) { return constant_series(1.0, 2.0, Gamma); }

}  // namespace

TEST_CASE("power_dominator covers omega") {
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    const IndexDominator d = power_dominator(p);
    for (double w : {0.1, 1.0, 2.5, 17.0, 1e3, 123456.7}) CHECK(d.a(d.f(w)) >= w * (1 - 1e-12));
  }
  CHECK_THROWS(power_dominator(0.5));
}

TEST_CASE("kronecker_rate on the dyadic instance") {
  const Rate K = kronecker_rate(dyadic_phi(), identity_dominator(), 1.0);
  CHECK(K(1.0) == 8.0);
  CHECK(K(0.5) == 24.0);
  CHECK(static_cast<double>(oracle::dyadic_K(1.0L)) == 8.0);
  CHECK(static_cast<double>(oracle::dyadic_K(0.5L)) == 24.0);
  CHECK_FALSE(K.strictly_decreasing());
  const auto x = dyadic(100);
  const auto a = iota_a(100);
  // (1/8) sum i 2^-i for i <= 8 = (2 - 10/256) / 8
  CHECK(kronecker_oracle(x, a, 8) == doctest::Approx(502.0 / 2048.0).epsilon(1e-15));
  CHECK(kronecker_oracle(x, a, 24) == doctest::Approx((2.0 - 26.0 / 16777216.0) / 24.0).epsilon(1e-14));
  for (std::int64_t n = 8; n <= 100; ++n) CHECK(kronecker_oracle(x, a, n) <= 1.0);
  for (std::int64_t n = 24; n <= 100; ++n) CHECK(kronecker_oracle(x, a, n) <= 0.5);
}

TEST_CASE("kronecker_oracle basics") {
  const std::vector<double> x = {1, 0, 0}, a = {1, 2, 3};
  CHECK(kronecker_oracle(x, a, 3) == doctest::Approx(1.0 / 3.0));
  const std::vector<double> ones(5, 1.0), xs = {0.5, 0.25, 0.125, 0.0625, 0.03125};
  CHECK(kronecker_oracle(xs, ones, 4) == doctest::Approx(0.9375));
  const std::vector<double> zero(50, 0.0);
  const auto aa = iota_a(50);
  for (std::int64_t n = 1; n <= 50; ++n) CHECK(kronecker_oracle(zero, aa, n) == 0.0);
  CHECK_THROWS(kronecker_oracle(x, a, 4));
  CHECK_THROWS(kronecker_oracle(x, a, 0));
}

TEST_CASE("sumbound_rhs values") {
  SeriesSpec zero{[](std::int64_t) { return 0.0; }, 2.0, 1.0, unit_series().Psi};
  for (std::int64_t Q = 0; Q < 6; ++Q) CHECK(sumbound_rhs(Q, 1.0, 2.0, zero, 1000).value == 0.0);

  // gamma = 1, p = 2, alpha = 2, eps = 1, Q = 1: prefactor 64/3, block 8, tail from 5.
  const SumBound b = sumbound_rhs(1, 1.0, 2.0, unit_series(), 100000);
  CHECK(b.block_end == 8);
  CHECK(b.tail_start == 5);
  CHECK(b.first == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
  long double tail = 0.0L;
  for (int m = 100000; m >= 5; --m) tail += 1.0L / (static_cast<long double>(m) * m);
  CHECK(b.second == doctest::Approx(static_cast<double>(64.0L / 3.0L * tail)).epsilon(1e-13));
  CHECK(b.value == doctest::Approx(b.first + b.second));
  // Omitted tail: sum_{m > 1e5} 1/m^2 <= 1e-5.
  CHECK(b.truncated_tail_bound == doctest::Approx(64.0 / 3.0 * 1e-5).epsilon(1e-6));
}

TEST_CASE("sumbound_rhs decreases in Q for constant gamma") {
  double prev = sumbound_rhs(1, 1.0, 2.0, unit_series(), 1 << 20).value;
  for (std::int64_t Q = 2; Q <= 10; ++Q) {
    const double v = sumbound_rhs(Q, 1.0, 2.0, unit_series(), 1 << 20).value;
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("sumbound_rhs rejects blocks beyond 2^53") {
  CHECK_THROWS_AS(sumbound_rhs(60, 1.0, 2.0, unit_series(), 10), std::overflow_error);
}

TEST_CASE("chi_rate on the unit instance") {
  // Long-double evaluation of the defining formula.
  constexpr double kChi = 12.508289986140348;
  CHECK(static_cast<double>(oracle::chi_constant_gamma(1, 2, 1.7L, 1, 2, 1)) == doctest::Approx(kChi).epsilon(1e-15));
  const Rate chi = chi_rate(1.0, 2.0, unit_series());
  CHECK(chi(1.0) == doctest::Approx(kChi).epsilon(1e-13));
  // First branch alone: log2(2 Psi(3/128)) = log2(256/3).
  CHECK(std::log2(2.0 * unit_series().Psi(3.0 / 128.0)) == doctest::Approx(std::log2(256.0 / 3.0)));
  CHECK(chi(1.0) > std::log2(256.0 / 3.0));
  // With Gamma = pi^2/6 the value is 12.4848.
  constexpr double kChiPi = 12.484822894262146;
  CHECK(chi_rate(1.0, 2.0, unit_series(M_PI * M_PI / 6))(1.0) == doctest::Approx(kChiPi).epsilon(1e-13));
}

TEST_CASE("chi_rate decreases strictly on the dyadic grid") {
  const Rate chi = chi_rate(1.0, 2.0, unit_series());
  double prev = chi(std::ldexp(1.0, -20));
  for (int k = 19; k >= 0; --k) {
    const double v = chi(std::ldexp(1.0, -k));
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("chen_sung_threshold against the composition oracle") {
  const SeriesSpec spec = unit_series();
  constexpr double kNStar = 2639904;
  CHECK(static_cast<double>(std::ceil(oracle::chen_sung_constant_gamma(1, 2, 1.7L, 1, 1, 0.5L))) == kNStar);
  CHECK(chen_sung_threshold(1, 0.5, spec, 1) == kNStar);
  // Dominates the estimate that keeps only the first branch of chi.
  const double alpha = 4.0 / 3.0;
  const double e = 1.0 / (3.0 * alpha);
  const double c = e * e * (alpha * alpha - 1.0) / (4.0 * std::pow(alpha, 4));
  const double first_only = std::pow(alpha, std::log(2.0 * spec.Psi(0.25 * c / 2.0)) / std::log(alpha) + 1.0);
  CHECK(chen_sung_threshold(1, 0.5, spec, 1) >= first_only);
}

TEST_CASE("csorgo_threshold halves eps and lambda") {
  const SeriesSpec spec = unit_series();
  constexpr double kCsorgo = 196329735;
  // alpha^(log_alpha(2K) + 1) = 2 K alpha is an integer here.
  CHECK(static_cast<double>(oracle::chen_sung_constant_gamma(1, 2, 1.7L, 1, 0.5L, 0.1L)) ==
        doctest::Approx(kCsorgo).epsilon(1e-15));
  CHECK(csorgo_threshold(1, 0.2, spec, 1) == kCsorgo);
  for (double eps : {0.2, 0.5, 1.0})
    for (double lam : {0.05, 0.3, 1.0}) CHECK(csorgo_threshold(eps, lam, spec, 1) == chen_sung_threshold(eps / 2, lam / 2, spec, 1));
}

TEST_CASE("threshold hypotheses are enforced") {
  const SeriesSpec spec = unit_series();
  CHECK_THROWS_AS(chen_sung_threshold(1.5, 0.5, spec, 1), HypothesisError);
  CHECK_THROWS_AS(chen_sung_threshold(1, 0.5, spec, 0.5), HypothesisError);
  CHECK_THROWS_AS(chen_sung_threshold(1, 0.5, unit_series(0.5), 1), HypothesisError);
  SeriesSpec step = spec;
  step.Psi = Rate([](double l) { return std::ceil(1.0 / l); }, Monotonicity::kNonincreasing);
  CHECK_THROWS_AS(chen_sung_threshold(1, 0.5, step, 1), HypothesisError);
  CHECK_THROWS_AS(csorgo_threshold(1.5, 0.5, spec, 1), HypothesisError);
  SeriesSpec p3 = constant_series(1.0, 3.0, 1.7);
  CHECK_THROWS_AS(csorgo_threshold(1, 0.5, p3, 1), HypothesisError);
  CHECK_NOTHROW(chen_sung_threshold(1, 0.5, spec, 1));
}

TEST_CASE("threshold monotonicity grids") {
  for (double p : {1.5, 2.0, 3.0}) {
    const SeriesSpec spec = constant_series(1.0, p, 2.0);
    for (double W : {1.0, 2.0, 4.0}) {
      double prev = 0;
      for (double lam : {1.0, 0.5, 0.1, 0.01}) {
        const double v = chen_sung_threshold(1.0, lam, spec, W);
        CHECK(v > prev);
        prev = v;
      }
      prev = 0;
      for (double eps : {1.0, 0.5, 0.25, 0.1}) {
        const double v = chen_sung_threshold(eps, 0.1, spec, W);
        CHECK(v >= prev);
        prev = v;
      }
    }
    for (double lam : {0.5, 0.05}) {
      CHECK(chen_sung_threshold(0.5, lam, spec, 2.0) >= chen_sung_threshold(0.5, lam, spec, 1.0));
      CHECK(chen_sung_threshold(0.5, lam, spec, 4.0) >= chen_sung_threshold(0.5, lam, spec, 2.0));
      CHECK(chen_sung_threshold(0.5, lam, constant_series(1.0, p, 4.0), 1.0) >=
            chen_sung_threshold(0.5, lam, spec, 1.0));
    }
  }
}

TEST_CASE("closed form dominates the composed threshold where applicable") {
  int applicable = 0;
  for (double p : {1.5, 2.0, 3.0})
    for (double g : {0.1, 1.0, 5.0})
      for (double W : {1.0, 3.0})
        for (double eps : {0.1, 0.5, 1.0})
          for (double lam : {0.5, 0.05, 0.005}) {
            const SeriesSpec spec = constant_series(g, p, std::max(1.0, g * 3.0));
            const ClosedFormThreshold cf = chen_sung_closed_form(eps, lam, spec, W);
            CHECK(cf.A_p == doctest::Approx(4096.0 / 27.0 * std::pow(48.0, 1.0 / p)));
            if (!cf.applicable) continue;
            ++applicable;
            CHECK(cf.value >= chen_sung_composed(eps, lam, spec, W));
          }
  CHECK(applicable > 50);
}

// ---------------------------------------------------------------------------
// Exact small models

TEST_CASE("enumerated and binomial tails agree") {
  for (int k = 1; k <= 12; ++k)
    for (double eps : {0.05, 0.2, 0.5}) {
      CHECK(oracle::bernoulli_tail_enumerated(k, 0.3, eps) ==
            doctest::Approx(oracle::bernoulli_tail_binomial(k, 0.3, eps)).epsilon(1e-12));
    }
}

TEST_CASE("subsequence tail sums stay below sumbound_rhs") {
  for (double p : {1.0, 2.0, 3.0}) {
    const model::Bernoulli m{0.3, p};
    for (double alpha : {1.5, 2.0}) {
      const auto ctx = model::bernoulli_context(m.q, alpha, 0.25, 2048);
      for (double eps : {0.1, 0.3}) {
        model::TailTable tail(m.q, eps);
        for (std::int64_t Q : {0, 2, 5}) {
          const double rhs = sumbound_rhs(Q, eps, alpha, m.spec(), 100000).value;
          for (std::int64_t s = 0; s <= ctx.band_count(); ++s) {
            CHECK(model::subsequence_tail(tail, ctx, s, Q, false) <= rhs);
            CHECK(model::subsequence_tail(tail, ctx, s, Q, true) <= rhs);
          }
        }
      }
    }
  }
}

TEST_CASE("chi_rate is a rate for the subsequence tail of a Bernoulli model") {
  const model::Bernoulli m{0.3, 2.0};
  const double alpha = 1.5, eps = 0.25;
  const auto ctx = model::bernoulli_context(m.q, alpha, 0.25, 4096);
  model::TailTable tail(m.q, eps);
  const Rate chi = chi_rate(eps, alpha, unit_series());
  for (double lam : {1.0, 0.3, 0.1}) {
    const auto Q = static_cast<std::int64_t>(std::ceil(chi(lam)));
    for (std::int64_t s = 0; s <= ctx.band_count(); ++s) {
      CHECK(model::subsequence_tail(tail, ctx, s, Q, false) <= lam);
      CHECK(model::subsequence_tail(tail, ctx, s, Q, true) <= lam);
    }
  }
}

TEST_CASE("kronecker contract on random summable sequences") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const double c = 0.1 + 1.9 * U(gen);
    const double r = 0.3 + 0.6 * U(gen);
    const double p = 1.0 + 2.0 * U(gen);
    // x_i = c r^i; sum_{i>n} x_i = c r^(n+1)/(1-r).
    const Rate phi([c, r](double e) { return std::max(0.0, std::log(e * (1 - r) / c) / std::log(r) - 1.0); },
                   Monotonicity::kStrictlyDecreasing);
    const double S = c * r / (1 - r) * (1 + 1e-9) + 1e-12;
    const Rate K = kronecker_rate(phi, power_dominator(p), S);
    for (double eps : {1.0, 0.3, 0.1}) {
      const auto start = static_cast<std::int64_t>(std::ceil(K(eps)));
      const std::int64_t stop = 2 * start + 200;
      std::vector<double> x(static_cast<std::size_t>(stop)), a(static_cast<std::size_t>(stop));
      for (std::int64_t i = 1; i <= stop; ++i) {
        x[static_cast<std::size_t>(i - 1)] = c * std::pow(r, static_cast<double>(i));
        a[static_cast<std::size_t>(i - 1)] = std::pow(static_cast<double>(i), p);
      }
      for (std::int64_t n = std::max<std::int64_t>(start, 1); n <= stop; n += 7) {
        CHECK(kronecker_oracle(x, a, n) <= eps);
      }
    }
  }
}

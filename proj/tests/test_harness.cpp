#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "slln/binomial.hpp"
#include "slln/harness.hpp"

using namespace slln;

namespace {

const FamilySpec kRademacher = IidFamily{Rademacher{}};

SupTailQuery query(FamilySpec f, std::int64_t n, double eps, std::int64_t M, std::uint64_t N, std::uint64_t seed = 1,
                   Center c = Center::kZero) {
  SupTailQuery q;
  q.family = std::move(f);
  q.n = n;
  q.eps = eps;
  q.horizon = M;
  q.paths = N;
  q.seed = seed;
  q.center = c;
  return q;
}

// P(max_{n<=m<=M} |S_m/m| > eps) over all 2^M sign sequences.
double exact_rademacher_sup_tail(int n, int M, double eps) {
  long hits = 0;
  for (std::uint32_t mask = 0; mask < (1U << M); ++mask) {
    int S = 0;
    bool hit = false;
    for (int m = 1; m <= M; ++m) {
      S += (mask >> (m - 1)) & 1U ? -1 : 1;
      if (m >= n && std::abs(static_cast<double>(S)) / m > eps) hit = true;
    }
    hits += hit;
  }
  return static_cast<double>(hits) / static_cast<double>(1U << M);
}

// Straight replay of every stream through the public sampler.
std::uint64_t replay_hits(const SupTailQuery& q, double c) {
  std::uint64_t hits = 0;
  PathSampler sampler = make_sampler(q.family);
  for (std::uint64_t i = 0; i < q.paths; ++i) {
    std::visit([&](auto& s) { s.reset(q.seed, i); }, sampler);
    double S = 0;
    bool hit = false;
    for (std::int64_t m = 1; m <= q.horizon; ++m) {
      S += std::visit([](auto& s) { return s.next(); }, sampler);
      if (m >= q.n && std::fabs(S / static_cast<double>(m) - c) > q.eps) hit = true;
    }
    hits += hit;
  }
  return hits;
}

}  // namespace

TEST_CASE("query validation") {
  CHECK_NOTHROW(query(kRademacher, 10, 0.5, 10, 100).validate());
  CHECK_THROWS(query(kRademacher, 10, 0.5, 9, 100).validate());
  CHECK_THROWS(query(kRademacher, 10, 0.5, 20, 99).validate());
  CHECK_THROWS(query(kRademacher, 0, 0.5, 20, 100).validate());
  CHECK_THROWS(query(kRademacher, 10, 0.0, 20, 100).validate());
  CHECK_THROWS(query(PairwiseSubsetProduct{3}, 8, 0.5, 20, 100).validate());
}

TEST_CASE("rademacher at eps = 1 never hits") {
  for (std::int64_t n : {1, 10, 1000}) {
    const auto e = estimate_sup_tail(query(kRademacher, n, 1.0, 32 * n, 1000));
    CHECK(e.hits == 0);
    CHECK(e.p_hat == 0.0);
    CHECK(e.ci_low == 0.0);
    CHECK(e.truncation_note);
  }
  // Same answer without the support shortcut: 0.999 is below the bound.
  const auto e = estimate_sup_tail(query(kRademacher, 50, 1.0 - 1e-15, 200, 500));
  CHECK(e.hits == 0);
}

TEST_CASE("exact enumeration at n = 2, M = 8") {
  for (double eps : {0.2, 0.3, 0.6}) {
    const double exact = exact_rademacher_sup_tail(2, 8, eps);
    constexpr std::uint64_t kN = 1000000;
    const auto e = estimate_sup_tail(query(kRademacher, 2, eps, 8, kN, 77));
    const double se = std::sqrt(exact * (1 - exact) / kN);
    CHECK_MESSAGE(std::abs(e.p_hat - exact) <= 5 * se, "eps = " << eps << " exact = " << exact);
  }
  CHECK(exact_rademacher_sup_tail(2, 8, 0.3) > 0.0);
}

TEST_CASE("estimate matches a replay of the public sampler") {
  const std::vector<SupTailQuery> qs = {
      query(kRademacher, 100, 0.3, 400, 300, 5),
      query(kRademacher, 3, 0.5, 130, 300, 6),
      query(IidFamily{UniformDist{-1, 1}}, 10, 0.3, 64, 300, 7),
      query(HeavyTailZeta{1.0, true}, 5, 0.5, 100, 300, 8, Center::kFamilyMean),
      query(PairwiseSubsetProduct{8}, 20, 0.25, 255, 300, 9),
  };
  for (const auto& q : qs) {
    const double c = q.center == Center::kFamilyMean ? family_moments(q.family).mean : 0.0;
    CHECK_MESSAGE(estimate_sup_tail(q).hits == replay_hits(q, c), to_string(q.family));
  }
}

TEST_CASE("results do not depend on the worker count") {
  const std::vector<SupTailQuery> qs = {
      query(kRademacher, 100, 0.2, 3200, 2000, 11),
      query(HeavyTailZeta{1.0, true}, 10, 0.5, 320, 5000, 12, Center::kFamilyMean),
      query(PairwiseSubsetProduct{10}, 64, 0.3, 1023, 2000, 13),
  };
  for (const auto& q : qs) {
    RunOptions one, many, odd;
    one.workers = 1;
    many.workers = 8;
    odd.workers = 3;
    const auto a = estimate_sup_tail(q, one);
    const auto b = estimate_sup_tail(q, many);
    const auto c = estimate_sup_tail(q, odd);
    CHECK(a.hits == b.hits);
    CHECK(a.hits == c.hits);
    CHECK(last_hit_indices(q, one) == last_hit_indices(q, many));
  }
}

TEST_CASE("truncated sup is monotone in the horizon path by path") {
  for (std::int64_t M : {200, 400, 1600}) {
    const auto q1 = query(kRademacher, 100, 0.25, M, 1000, 21);
    auto q2 = q1;
    q2.horizon = 2 * M;
    const auto a = last_hit_indices(q1);
    const auto b = last_hit_indices(q2);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(b[i] >= a[i]);
      CHECK(a[i] <= M);
    }
    CHECK(estimate_sup_tail(q2).hits >= estimate_sup_tail(q1).hits);
  }
}

TEST_CASE("last_hit_indices agree with estimate_sup_tail") {
  const auto q = query(kRademacher, 1, 0.3, 640, 2000, 31);
  const auto last = last_hit_indices(q);
  for (std::int64_t n : {1, 5, 20, 100, 600}) {
    auto qn = q;
    qn.n = n;
    std::uint64_t count = 0;
    for (auto l : last) count += l >= n;
    CHECK(estimate_sup_tail(qn).hits == count);
  }
}

TEST_CASE("horizon is clamped to the family length") {
  const auto e = estimate_sup_tail(query(PairwiseSubsetProduct{10}, 512, 0.5, 32 * 512, 200));
  CHECK(e.horizon_used == 1023);
}

TEST_CASE("budget guard") {
  try {
    estimate_sup_tail(query(kRademacher, 1000, 0.1, 100000, 1000000));
    FAIL("expected BudgetError");
  } catch (const BudgetError& e) {
    CHECK(e.required() == doctest::Approx(1e11));
    CHECK(e.budget() == doctest::Approx(1e10));
  }
  RunOptions small;
  small.budget = 1e4;
  CHECK_THROWS_AS(estimate_sup_tail(query(kRademacher, 10, 0.1, 1000, 100), small), BudgetError);
}

TEST_CASE("estimate invariants") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> U(0.05, 0.8);
  for (int t = 0; t < 20; ++t) {
    const double eps = U(gen);
    const auto e = estimate_sup_tail(query(kRademacher, 20, eps, 200, 500, t));
    CHECK(e.ci_low <= e.p_hat);
    CHECK(e.p_hat <= e.ci_high);
    CHECK(e.p_hat >= 0.0);
    CHECK(e.p_hat <= 1.0);
    CHECK(e.p_hat == doctest::Approx(static_cast<double>(e.hits) / e.paths));
  }
}

TEST_CASE("horizon_sweep") {
  const auto zero = horizon_sweep(query(kRademacher, 100, 1.0, 3200, 1000));
  CHECK(zero.hits == 0);
  CHECK(zero.stabilized);
  CHECK(zero.horizon_used >= 3200);

  const auto q = query(kRademacher, 100, 0.3, 3200, 5000, 3);
  const auto s = horizon_sweep(q);
  CHECK(s.stabilized);
  CHECK(s.horizon_used >= 3200);
  CHECK(s.hits >= estimate_sup_tail(q).hits);

  RunOptions tight;
  tight.budget = 5000.0 * 3200.0 * 1.5;
  const auto cut = horizon_sweep(query(kRademacher, 100, 0.1, 3200, 5000, 3), tight, 16);
  CHECK(cut.horizon_used == 3200);
  // At eps = 0.1 the hits keep growing past 3200, so a single step cannot settle.
  CHECK_FALSE(cut.stabilized);
}

TEST_CASE("heavy-tail hits come from the first block") {
  const auto q = query(HeavyTailZeta{1.0, true}, 10, 0.5, 10, 200000, 2, Center::kFamilyMean);
  auto q32 = q;
  q32.horizon = 320;
  const auto a = estimate_sup_tail(q);
  const auto b = estimate_sup_tail(q32);
  CHECK(b.hits >= a.hits);
  CHECK(static_cast<double>(a.hits) >= 0.5 * static_cast<double>(b.hits));
}

// ---------------------------------------------------------------------------
// Verdicts

TEST_CASE("verify_upper examples") {
  MomentProfile unit;
  const auto r = verify_upper(query(kRademacher, 10000, 1.0, 320000, 10000), unit);
  CHECK(r.analytic == doctest::Approx(0.1536));
  CHECK(r.empirical.hits == 0);
  CHECK(r.verdict == Verdict::kVerified);

  const auto v = verify_upper(query(PairwiseSubsetProduct{10}, 512, 0.5, 1023, 1000), unit);
  CHECK(v.analytic == doctest::Approx(24.0));
  CHECK(v.verdict == Verdict::kVacuous);
  CHECK(v.empirical.horizon_used == 1023);

  const auto big = verify_upper(query(kRademacher, 100000, 0.3, 3200000, 1000, 5), unit);
  CHECK(big.analytic == doctest::Approx(1536.0 / (1e5 * 0.027)));
  CHECK(big.verdict == Verdict::kVerified);
}

TEST_CASE("verify_upper rejects a profile below the family") {
  MomentProfile small;
  small.sigma2 = 0.5;
  CHECK_THROWS_AS(verify_upper(query(kRademacher, 100, 0.5, 3200, 100), small), HypothesisError);
  MomentProfile unit;
  CHECK_THROWS_AS(verify_upper(query(IidFamily{UniformDist{0, 2}}, 100, 0.5, 3200, 100), unit), HypothesisError);
  CHECK_NOTHROW(verify_upper(query(IidFamily{UniformDist{0, 2}}, 100, 0.5, 3200, 100, 1, Center::kFamilyMean), unit));
}

TEST_CASE("small eps makes the upper bound vacuous") {
  MomentProfile unit;
  for (double eps : {0.05, 0.1}) {
    const auto r = verify_upper(query(kRademacher, 100, eps, 3200, 1000), unit);
    CHECK(r.verdict == Verdict::kVacuous);
  }
}

TEST_CASE("verify_lower") {
  CHECK_THROWS_AS(verify_lower(1.0, 10, 1.5, 1000, 1), HypothesisError);
  CHECK_NOTHROW(verify_lower(1.0, 10, 1.0, 1000, 1));
  const ZetaConstants z = zeta_constants(1.0);
  const auto r = verify_lower(1.0, 3, 0.5, 1000000, 1);
  CHECK(r.analytic == doctest::Approx(z.omega / 9.0));
  CHECK(r.analytic == doctest::Approx(6.3e-4).epsilon(0.01));
  CHECK(r.empirical.horizon_used == 96);
  CHECK(r.verdict == Verdict::kVerified);
  CHECK(r.empirical.ci_low >= r.analytic);
}

TEST_CASE("clopper_pearson against bisection") {
  const Interval a = clopper_pearson(48, 10000);
  CHECK(a.low == doctest::Approx(0.0035411986595878849).epsilon(1e-10));
  CHECK(a.high == doctest::Approx(0.0063591234275017332).epsilon(1e-10));
  const Interval z = clopper_pearson(0, 100);
  CHECK(z.low == 0.0);
  CHECK(z.high == doctest::Approx(0.036216692645176421).epsilon(1e-10));
  const Interval full = clopper_pearson(100, 100);
  CHECK(full.high == 1.0);
  for (std::uint64_t N : {10ULL, 137ULL, 1000ULL}) {
    for (std::uint64_t k : std::vector<std::uint64_t>{0, 1, 5, N / 2, N - 1, N}) {
      const auto [lo, hi] = oracle::clopper_pearson(k, N);
      const Interval ci = clopper_pearson(k, N);
      CHECK(ci.low == doctest::Approx(lo).epsilon(1e-9));
      CHECK(ci.high == doctest::Approx(hi).epsilon(1e-9));
      CHECK(ci.low <= static_cast<double>(k) / N);
      CHECK(ci.high >= static_cast<double>(k) / N);
    }
  }
  CHECK_THROWS(clopper_pearson(5, 4));
  CHECK_THROWS(clopper_pearson(0, 0));
}

TEST_CASE("baum_katz_partial") {
  CHECK_THROWS(baum_katz_partial(0.0, 1.0, kRademacher, 100, 100, 1));
  const auto r = baum_katz_partial(-0.5, 1.0, kRademacher, 1000, 200, 1);
  REQUIRE(!r.points.empty());
  CHECK(r.points.back().N == 1000);
  CHECK(r.horizon == 32000);
  double prev = 0.0;
  for (const auto& p : r.points) {
    CHECK(p.empirical == 0.0);
    CHECK(p.majorant >= prev);
    CHECK(p.majorant <= p.majorant_literal * (1 + 1e-12));
    prev = p.majorant;
  }
  // The majorant converges: its tail past N is at most 1536 * 2 / sqrt(N).
  const auto e = baum_katz_partial(-0.5, 0.3, kRademacher, 4096, 200, 2);
  const double C = 1536.0 / 0.027;
  for (const auto& p : e.points) {
    CHECK(p.ci_low <= p.empirical);
    CHECK(p.empirical <= p.ci_high);
    CHECK(p.ci_high <= p.majorant * (1 + 1e-12));
    CHECK(e.points.back().majorant - p.majorant <= C * 2.0 / std::sqrt(static_cast<double>(p.N)));
  }
}

TEST_CASE("verify_threshold on the Uniform(0,1) instance") {
  const FamilySpec uniform = IidFamily{UniformDist{0, 1}};
  const SeriesSpec spec = constant_series(1.0 / 12.0, 2.0, 1.0);
  const auto r = verify_threshold(ThresholdKind::kChenSung, spec, 1.0, 1.0, 0.5, uniform, 1000, 1);
  CHECK(r.n_star == 168830);
  CHECK(r.verdict == Verdict::kVerified);
  CHECK(r.empirical.hits == 0);
  // A small eps pushes n* past the budget.
  const auto far = verify_threshold(ThresholdKind::kChenSung, spec, 1.0, 0.1, 0.1, uniform, 1000, 1);
  CHECK(far.verdict == Verdict::kInconclusive);
  CHECK(far.n_star > 1e7);
  CHECK(!far.note.empty());
  CHECK_THROWS_AS(verify_threshold(ThresholdKind::kCsorgo, spec, 1.0, 1.5, 0.5, uniform, 1000, 1), HypothesisError);
}

TEST_CASE("verify_threshold on a deterministic family") {
  const FamilySpec constant = IidFamily{DiscreteDist{{0.7}, {1.0}}};
  SeriesSpec spec{[](std::int64_t) { return 0.0; }, 2.0, 1.0,
                  Rate([](double l) { return 1.0 / l; }, Monotonicity::kStrictlyDecreasing)};
  const auto r = verify_threshold(ThresholdKind::kChenSung, spec, 1.0, 0.5, 0.5, constant, 200, 1);
  if (r.verdict != Verdict::kInconclusive) {
    CHECK(r.verdict == Verdict::kVerified);
    CHECK(r.empirical.hits == 0);
  }
  CHECK(r.n_star >= 1);
}

TEST_CASE("verdict does not flip to violated with more paths") {
  MomentProfile unit;
  for (std::uint64_t N : {1000ULL, 10000ULL}) {
    const auto r = verify_upper(query(kRademacher, 1000, 0.5, 32000, N, 4), unit);
    CHECK(r.verdict != Verdict::kViolated);
  }
}

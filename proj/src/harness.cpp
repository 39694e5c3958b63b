#include "slln/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "slln/binomial.hpp"
#include "slln/numeric.hpp"

namespace slln {

namespace {

enum class ScanMode { kFirst, kLast };

struct ScanParams {
  std::int64_t n;
  std::int64_t M;
  double eps;
  double center;
  ScanMode mode;
};

// Returns the first (or last) hitting index in [n, M], 0 if none.
std::int64_t scan_path(PathSampler& sampler, const ScanParams& p) {
  return std::visit(
      [&p](auto& s) -> std::int64_t {
        double S = 0.0;
        std::int64_t last = 0;
        for (std::int64_t m = 1; m <= p.M; ++m) {
          S += s.next();
          if (m >= p.n && std::fabs(S / static_cast<double>(m) - p.center) > p.eps) {
            if (p.mode == ScanMode::kFirst) return m;
            last = m;
          }
        }
        return last;
      },
      sampler);
}

// Same result as scan_path for a Rademacher path centred at 0, consuming
// 64 signs per word and skipping words that cannot contain a hit.
std::int64_t scan_rademacher(const RademacherSampler& s, const ScanParams& p) {
  std::int64_t S = 0;
  std::int64_t last = 0;
  const double slack = 1.0 - 1e-12;
  for (std::int64_t base = 0; base < p.M; base += 64) {
    const std::uint64_t word = s.word(static_cast<std::uint64_t>(base / 64));
    const std::int64_t m_end = std::min(base + 64, p.M);
    if (m_end == base + 64) {
      const bool before_start = m_end < p.n;
      const bool too_small = static_cast<double>(std::llabs(S) + 64) < p.eps * static_cast<double>(base + 1) * slack;
      if (before_start || too_small) {
        S += 64 - 2 * static_cast<std::int64_t>(std::popcount(word));
        continue;
      }
    }
    for (std::int64_t m = base + 1; m <= m_end; ++m) {
      S += ((word >> (m - base - 1)) & 1ULL) ? -1 : 1;
      if (m >= p.n && std::fabs(static_cast<double>(S) / static_cast<double>(m)) > p.eps) {
        if (p.mode == ScanMode::kFirst) return m;
        last = m;
      }
    }
  }
  return last;
}

bool is_rademacher(const FamilySpec& f) {
  const auto* iid = std::get_if<IidFamily>(&f);
  return iid != nullptr && std::holds_alternative<Rademacher>(iid->dist);
}

/// Runs body(begin, end) over contiguous chunks of [0, count) on `workers`
/// threads and rethrows the first exception.
template <class Body>
void run_chunked(std::uint64_t count, unsigned workers, Body body) {
  workers = static_cast<unsigned>(std::clamp<std::uint64_t>(workers, 1, std::max<std::uint64_t>(count, 1)));
  if (workers == 1) {
    body(std::uint64_t{0}, count);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t begin = count * w / workers;
    const std::uint64_t end = count * (w + 1) / workers;
    threads.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

struct Prepared {
  ScanParams params;
  bool trivially_zero;
  bool rademacher;
};

Prepared prepare(const SupTailQuery& q, const RunOptions& options, ScanMode mode) {
  q.validate();
  const auto max_len = family_max_length(q.family);
  const std::int64_t M = static_cast<std::int64_t>(std::min<std::uint64_t>(static_cast<std::uint64_t>(q.horizon), max_len));
  const double required = static_cast<double>(q.paths) * static_cast<double>(M);
  if (required > options.budget) throw BudgetError(required, options.budget);

  const double c = q.center == Center::kFamilyMean ? family_moments(q.family).mean : 0.0;
  // Bounded steps with |x - c| <= eps keep every running mean within eps.
  const double reach = family_deviation_bound(q.family, c);
  Prepared out{{q.n, M, q.eps, c, mode}, reach <= q.eps * (1.0 - 1e-9), is_rademacher(q.family) && c == 0.0};
  return out;
}

template <class Sink>
void simulate(const SupTailQuery& q, const RunOptions& options, const Prepared& prep, Sink sink) {
  const PathSampler proto = make_sampler(q.family);
  const unsigned workers = options.workers == 0 ? default_workers() : options.workers;
  run_chunked(q.paths, workers, [&](std::uint64_t begin, std::uint64_t end) {
    PathSampler sampler = proto;
    for (std::uint64_t i = begin; i < end; ++i) {
      std::visit([&](auto& s) { s.reset(q.seed, i); }, sampler);
      const std::int64_t hit = prep.rademacher ? scan_rademacher(std::get<RademacherSampler>(sampler), prep.params)
                                               : scan_path(sampler, prep.params);
      sink(i, hit);
    }
  });
}

SupTailEstimate make_estimate(std::uint64_t hits, std::uint64_t paths, std::int64_t horizon) {
  SupTailEstimate e;
  e.hits = hits;
  e.paths = paths;
  e.p_hat = static_cast<double>(hits) / static_cast<double>(paths);
  const Interval ci = clopper_pearson(hits, paths);
  e.ci_low = std::min(ci.low, e.p_hat);
  e.ci_high = std::max(ci.high, e.p_hat);
  e.horizon_used = horizon;
  return e;
}

/// E|X - E X| for one variable of the family.
double centered_abs_mean(const FamilySpec& family) {
  if (const auto* iid = std::get_if<IidFamily>(&family)) {
    if (const auto* u = std::get_if<UniformDist>(&iid->dist)) return (u->b - u->a) / 4.0;
    if (const auto* d = std::get_if<DiscreteDist>(&iid->dist)) {
      const double mean = family_moments(family).mean;
      double acc = 0.0;
      for (std::size_t i = 0; i < d->values.size(); ++i) acc += d->probs[i] * std::abs(d->values[i] - mean);
      return acc;
    }
    return 1.0;
  }
  if (const auto* h = std::get_if<HeavyTailZeta>(&family)) {
    return family_moments(HeavyTailZeta{h->delta, true}).abs_mean;
  }
  return 1.0;
}

}  // namespace

void SupTailQuery::validate() const {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (horizon < n) throw std::invalid_argument("horizon must be >= n");
  if (paths < 100) throw std::invalid_argument("paths must be >= 100");
  if (static_cast<std::uint64_t>(n) > family_max_length(family)) {
    throw std::invalid_argument("n exceeds the family length");
  }
}

unsigned default_workers() {
  if (const char* env = std::getenv("SLLN_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 1024) return static_cast<unsigned>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

BudgetError::BudgetError(double required, double budget)
    : std::runtime_error([&] {
        std::ostringstream os;
        os.precision(9);
        os << "resource cap exceeded: paths * horizon = " << required << " sample-steps, budget " << budget;
        return os.str();
      }()),
      required_(required),
      budget_(budget) {}

SupTailEstimate estimate_sup_tail(const SupTailQuery& q, const RunOptions& options) {
  const Prepared prep = prepare(q, options, ScanMode::kFirst);
  if (prep.trivially_zero) return make_estimate(0, q.paths, prep.params.M);

  std::atomic<std::uint64_t> hits{0};
  simulate(q, options, prep, [&hits](std::uint64_t, std::int64_t hit) {
    if (hit != 0) hits.fetch_add(1, std::memory_order_relaxed);
  });
  return make_estimate(hits.load(), q.paths, prep.params.M);
}

std::vector<std::int64_t> last_hit_indices(const SupTailQuery& q, const RunOptions& options) {
  const Prepared prep = prepare(q, options, ScanMode::kLast);
  std::vector<std::int64_t> last(q.paths, 0);
  if (prep.trivially_zero) return last;
  simulate(q, options, prep, [&last](std::uint64_t i, std::int64_t hit) { last[i] = hit; });
  return last;
}

SupTailEstimate horizon_sweep(const SupTailQuery& q, const RunOptions& options, int max_doublings) {
  SupTailEstimate current = estimate_sup_tail(q, options);
  const auto max_len = static_cast<std::int64_t>(std::min<std::uint64_t>(family_max_length(q.family), 1ULL << 62));
  SupTailQuery next = q;
  for (int i = 0; i < max_doublings; ++i) {
    if (current.horizon_used >= max_len) return current;
    next.horizon = current.horizon_used * 2;
    const double need = static_cast<double>(q.paths) * static_cast<double>(std::min(next.horizon, max_len));
    if (need > options.budget) {
      current.stabilized = false;
      return current;
    }
    SupTailEstimate wider = estimate_sup_tail(next, options);
    const double diff = std::abs(static_cast<double>(wider.hits) - static_cast<double>(current.hits));
    const bool stable = diff == 0.0 || diff < 2.0 * std::sqrt(static_cast<double>(current.hits));
    current = wider;
    if (stable) return current;
  }
  current.stabilized = false;
  return current;
}

MomentProfile centered_profile(const FamilySpec& family, Center center) {
  const Moments m = family_moments(family);
  if (center == Center::kZero && std::abs(m.mean) > 1e-12) {
    throw HypothesisError("hypothesis violated: mean-zero variables required (use center=family-mean)");
  }
  MomentProfile profile;
  profile.sigma2 = m.variance;
  profile.tau = centered_abs_mean(family);
  return profile;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kVerified:
      return "verified";
    case Verdict::kViolated:
      return "violated";
    case Verdict::kInconclusive:
      return "inconclusive";
    case Verdict::kVacuous:
      return "vacuous";
  }
  return "inconclusive";
}

BoundReport verify_upper(const SupTailQuery& q, const MomentProfile& profile, const RunOptions& options) {
  profile.validate();
  const MomentProfile actual = centered_profile(q.family, q.center);
  if (profile.sigma2 < actual.sigma2 * (1.0 - 1e-12)) {
    throw HypothesisError("hypothesis violated: sigma2 must bound the variance of the family");
  }
  if (profile.tau < actual.tau * (1.0 - 1e-12)) {
    throw HypothesisError("hypothesis violated: tau must bound E|X| of the centred family");
  }
  BoundReport report;
  report.analytic = slln_upper_bound(static_cast<double>(q.n), q.eps, profile);
  report.empirical = estimate_sup_tail(q, options);
  if (report.analytic >= 1.0) {
    report.verdict = Verdict::kVacuous;
  } else if (report.empirical.ci_low > report.analytic) {
    report.verdict = Verdict::kViolated;
  } else if (report.empirical.ci_high <= report.analytic) {
    report.verdict = Verdict::kVerified;
  } else {
    report.verdict = Verdict::kInconclusive;
  }
  return report;
}

BoundReport verify_lower(double delta, std::int64_t n, double eps, std::uint64_t paths, std::uint64_t seed,
                         const RunOptions& options, std::int64_t horizon) {
  if (!(eps > 0.0) || eps > 1.0) {
    throw HypothesisError("hypothesis violated: 0 < eps <= 1 required by the heavy-tail lower bound");
  }
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  SupTailQuery q;
  q.family = HeavyTailZeta{delta, true};
  q.n = n;
  q.eps = eps;
  q.horizon = horizon == 0 ? 32 * n : horizon;
  q.paths = paths;
  q.seed = seed;
  q.center = Center::kFamilyMean;

  const ZetaConstants k = zeta_constants(delta);
  BoundReport report;
  report.analytic = k.omega / std::pow(static_cast<double>(n), 1.0 + delta);
  report.empirical = estimate_sup_tail(q, options);
  if (report.analytic >= 1.0) {
    report.verdict = Verdict::kVacuous;
  } else if (report.empirical.ci_high < report.analytic) {
    report.verdict = Verdict::kViolated;
  } else if (report.empirical.ci_low >= report.analytic) {
    report.verdict = Verdict::kVerified;
  } else {
    report.verdict = Verdict::kInconclusive;
  }
  return report;
}

BaumKatzResult baum_katz_partial(double r, double eps, const FamilySpec& family, std::int64_t N_max,
                                 std::uint64_t paths, std::uint64_t seed, const RunOptions& options, Center center) {
  if (!(r < 0.0)) throw HypothesisError("hypothesis violated: r < 0 required for the Baum-Katz sum");
  if (N_max < 1) throw std::invalid_argument("N_max must be >= 1");

  BaumKatzResult out;
  out.r = r;
  out.eps = eps;
  out.paths = paths;
  out.profile = centered_profile(family, center);

  SupTailQuery q;
  q.family = family;
  q.n = 1;
  q.eps = eps;
  q.horizon = 32 * N_max;
  q.paths = paths;
  q.seed = seed;
  q.center = center;
  if (static_cast<std::uint64_t>(N_max) > family_max_length(family)) {
    throw std::invalid_argument("N_max exceeds the family length");
  }
  std::vector<std::int64_t> last = last_hit_indices(q, options);
  out.horizon = static_cast<std::int64_t>(std::min<std::uint64_t>(static_cast<std::uint64_t>(q.horizon), family_max_length(family)));
  std::sort(last.begin(), last.end());

  const double C = slln_upper_bound(1.0, eps, out.profile);
  CompensatedSum emp, lo, hi, maj, lit;
  std::uint64_t cached_hits = std::numeric_limits<std::uint64_t>::max();
  SupTailEstimate cached;
  std::int64_t next_grid = 1;
  for (std::int64_t n = 1; n <= N_max; ++n) {
    const auto below = static_cast<std::uint64_t>(std::lower_bound(last.begin(), last.end(), n) - last.begin());
    const std::uint64_t hits = paths - below;
    if (hits != cached_hits) {
      cached = make_estimate(hits, paths, out.horizon);
      cached_hits = hits;
    }
    const double weight = std::pow(static_cast<double>(n), r);
    emp.add(weight * cached.p_hat);
    lo.add(weight * cached.ci_low);
    hi.add(weight * cached.ci_high);
    maj.add(weight * std::min(1.0, C / static_cast<double>(n)));
    lit.add(C * std::pow(static_cast<double>(n), r - 1.0));
    if (n == next_grid || n == N_max) {
      out.points.push_back({n, emp.value(), lo.value(), hi.value(), maj.value(), lit.value()});
      if (n == next_grid) next_grid *= 2;
    }
  }
  return out;
}

BoundReport verify_threshold(ThresholdKind kind, const SeriesSpec& spec, double W, double eps, double lambda,
                             const FamilySpec& family, std::uint64_t paths, std::uint64_t seed,
                             const RunOptions& options) {
  BoundReport report;
  report.analytic = lambda;
  report.n_star = kind == ThresholdKind::kCsorgo ? csorgo_threshold(eps, lambda, spec, W)
                                                 : chen_sung_threshold(eps, lambda, spec, W);
  report.empirical.paths = paths;
  const double n_star = std::max(1.0, report.n_star);
  const double horizon = 32.0 * n_star;
  const double need = static_cast<double>(paths) * horizon;
  if (!std::isfinite(n_star) || horizon > 9007199254740992.0 || need > options.budget ||
      n_star > static_cast<double>(family_max_length(family))) {
    report.verdict = Verdict::kInconclusive;
    std::ostringstream os;
    os.precision(9);
    os << "n* = " << report.n_star << " needs " << need << " sample-steps; budget " << options.budget;
    report.note = os.str();
    return report;
  }
  SupTailQuery q;
  q.family = family;
  q.n = static_cast<std::int64_t>(n_star);
  q.eps = eps;
  q.horizon = static_cast<std::int64_t>(horizon);
  q.paths = paths;
  q.seed = seed;
  q.center = Center::kFamilyMean;
  report.empirical = estimate_sup_tail(q, options);
  if (report.empirical.ci_low > lambda) {
    report.verdict = Verdict::kViolated;
  } else if (report.empirical.ci_high <= lambda) {
    report.verdict = Verdict::kVerified;
  } else {
    report.verdict = Verdict::kInconclusive;
  }
  return report;
}

}  // namespace slln

#include "slln/kronecker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "slln/numeric.hpp"

namespace slln {

namespace {

struct SeriesScales {
  double alpha_p_minus_1;
  double two_p;
  double alpha_2p;
  double eps_p;
};

SeriesScales scales(double eps, double alpha, double p) {
  return {std::pow(alpha, p) - 1.0, std::pow(2.0, p), std::pow(alpha, 2.0 * p), std::pow(eps, p)};
}

void check_series(const SeriesSpec& spec) {
  if (!spec.gamma) throw std::invalid_argument("series spec needs gamma");
  if (!(spec.p >= 1.0)) throw std::invalid_argument("moment order p must be >= 1");
  if (!(spec.Gamma > 0.0)) throw std::invalid_argument("Gamma must be positive");
}

void check_chen_sung_hypotheses(double eps, double lambda, const SeriesSpec& spec, double W) {
  check_series(spec);
  if (!(eps > 0.0) || eps > 1.0) {
    throw HypothesisError("hypothesis violated: 0 < eps <= 1 required by the Chen-Sung threshold");
  }
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(W >= 1.0)) {
    throw HypothesisError("hypothesis violated: W >= 1 required by the Chen-Sung threshold");
  }
  if (!(spec.Gamma >= 1.0)) {
    throw HypothesisError("hypothesis violated: Gamma >= 1 required by the Chen-Sung threshold");
  }
  if (!spec.Psi.strictly_decreasing()) {
    throw HypothesisError("hypothesis violated: the series tail rate Psi must be strictly decreasing");
  }
}

}  // namespace

SeriesSpec constant_series(double g, double p, double Gamma) {
  if (!(g > 0.0)) throw std::invalid_argument("constant series needs gamma > 0");
  if (!(p > 1.0)) throw std::invalid_argument("constant series needs p > 1");
  if (!(Gamma > 0.0)) throw std::invalid_argument("Gamma must be positive");
  // sum_{m>n} g/m^p <= g n^(1-p) / (p - 1)
  Rate psi([g, p](double lambda) { return std::pow(g / ((p - 1.0) * lambda), 1.0 / (p - 1.0)); },
           Monotonicity::kStrictlyDecreasing);
  return SeriesSpec{[g](std::int64_t) { return g; }, p, Gamma, std::move(psi)};
}

IndexDominator power_dominator(double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("power_dominator needs p >= 1");
  return {
      [p](double omega) { return std::max(1.0, std::ceil(std::pow(omega, 1.0 / p))); },
      [p](double n) { return std::pow(n, p); },
  };
}

Rate kronecker_rate(Rate phi, IndexDominator dom, double S) {
  if (!(S > 0.0)) throw std::invalid_argument("series bound S must be positive");
  if (!dom.f || !dom.a) throw std::invalid_argument("index dominator needs f and a");
  return Rate(
      [phi = std::move(phi), dom = std::move(dom), S](double eps) {
        const double head = phi(eps / 4.0);
        const double M = std::max(1.0, std::ceil(head));
        return std::max(head, dom.f(4.0 * dom.a(M) * S / eps));
      },
      Monotonicity::kNonincreasing);
}

double kronecker_oracle(std::span<const double> x, std::span<const double> a, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("kronecker_oracle needs n >= 1");
  const auto un = static_cast<std::size_t>(n);
  if (x.size() < un || a.size() < un) throw std::invalid_argument("sequence shorter than n");
  CompensatedSum acc;
  for (std::size_t i = 0; i < un; ++i) acc.add(a[i] * x[i]);
  return acc.value() / a[un - 1];
}

SumBound sumbound_rhs(std::int64_t Q, double eps, double alpha, const SeriesSpec& spec, std::int64_t tail_upto) {
  check_series(spec);
  if (Q < 0) throw std::invalid_argument("Q must be nonnegative");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must be > 1");

  const double block = std::floor(std::pow(alpha, static_cast<double>(Q + 2)));
  if (!(block <= 9007199254740992.0)) throw std::overflow_error("floor(alpha^(Q+2)) exceeds 2^53");
  const double start = std::floor(std::pow(alpha, static_cast<double>(Q + 1))) + 1.0;

  SumBound out;
  out.block_end = static_cast<std::int64_t>(block);
  out.tail_start = static_cast<std::int64_t>(start);
  out.tail_upto = tail_upto;

  const double p = spec.p;
  const auto sc = scales(eps, alpha, p);
  const double prefactor = sc.two_p * sc.alpha_2p / (sc.eps_p * sc.alpha_p_minus_1);

  CompensatedSum head;
  for (std::int64_t m = 1; m <= out.block_end; ++m) head.add(spec.gamma(m));
  out.first = prefactor / std::pow(block, p) * head.value();

  CompensatedSum tail;
  for (std::int64_t m = out.tail_start; m <= tail_upto; ++m) {
    tail.add(spec.gamma(m) / std::pow(static_cast<double>(m), p));
  }
  out.second = prefactor * tail.value();
  out.value = out.first + out.second;

  // Psi(lambda) <= tail_upto means the omitted tail is at most lambda.
  const double last = static_cast<double>(std::max(tail_upto, out.tail_start - 1));
  double omitted = spec.Gamma;
  if (spec.Psi.strictly_decreasing()) {
    double hi = std::max(spec.Gamma, 1.0);
    for (int i = 0; i < 64 && spec.Psi(hi) > last; ++i) hi *= 2.0;
    if (spec.Psi(hi) <= last) omitted = std::min(omitted, invert_rate(spec.Psi, last, hi));
  }
  out.truncated_tail_bound = prefactor * omitted;
  return out;
}

Rate chi_rate(double eps, double alpha, const SeriesSpec& spec) {
  check_series(spec);
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must be > 1");

  const double p = spec.p;
  const auto sc = scales(eps, alpha, p);
  const double psi_scale = sc.eps_p * sc.alpha_p_minus_1 / (sc.two_p * sc.alpha_2p);
  const double R = sc.two_p * spec.Gamma * sc.alpha_2p / (sc.eps_p * sc.alpha_p_minus_1);
  const double log_alpha = std::log(alpha);

  const Rate Psi = spec.Psi;
  Rate psi([Psi, psi_scale](double lambda) { return Psi(lambda * psi_scale); }, Psi.monotonicity());
  const Rate K = kronecker_rate(psi, power_dominator(p), R);

  return Rate(
      [=](double lambda) {
        const double tail_branch = std::log(2.0 * Psi(lambda * psi_scale / 2.0)) / log_alpha;
        const double block_branch = std::log(2.0 * K(lambda / 2.0)) / log_alpha;
        return std::max(tail_branch, block_branch);
      },
      Monotonicity::kNonincreasing);
}

double chen_sung_composed(double eps, double lambda, const SeriesSpec& spec, double W) {
  check_chen_sung_hypotheses(eps, lambda, spec, W);
  const Rate threshold = genquant_threshold(
      eps, W,
      [spec](double e, double /*delta*/, double alpha, double lam) { return chi_rate(e, alpha, spec)(lam); },
      Monotonicity::kNonincreasing);
  return threshold(lambda);
}

double chen_sung_threshold(double eps, double lambda, const SeriesSpec& spec, double W) {
  // When the Kronecker branch wins, alpha^(log_alpha(2K) + 1) is an exact
  // integer and the pow/log round trip lands a few ulps above it.
  const double v = chen_sung_composed(eps, lambda, spec, W);
  const double r = std::round(v);
  if (std::fabs(v - r) <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, r)) return r;
  return std::ceil(v);
}

ClosedFormThreshold chen_sung_closed_form(double eps, double lambda, const SeriesSpec& spec, double W) {
  check_chen_sung_hypotheses(eps, lambda, spec, W);
  const double p = spec.p;
  ClosedFormThreshold out;
  out.A_p = 4096.0 / 27.0 * std::pow(48.0, 1.0 / p);
  out.B_p = 1.0 / (3.0 * std::pow(2.0, p + 4.0) * std::pow(3.0, p) * std::pow(4.0 / 3.0, 3.0 * p));
  const double scale = lambda * std::pow(eps, p + 1.0);
  out.value = out.A_p * std::pow(W * spec.Gamma / scale, 1.0 / p) * spec.Psi(out.B_p * scale / W);

  // Conditions under which the two inner ceilings are absorbed.
  const double alpha = 1.0 + eps / (3.0 * W);
  const double eps_in = eps / (3.0 * alpha);
  const double lam_in = lambda / 2.0;
  const auto sc = scales(eps_in, alpha, p);
  const double inner_psi = spec.Psi(lam_in * sc.eps_p * sc.alpha_p_minus_1 / (8.0 * sc.two_p * sc.alpha_2p));
  const double multiplier = 2.0 * alpha * alpha / eps_in *
                            std::pow(8.0 * spec.Gamma / (lam_in * sc.alpha_p_minus_1), 1.0 / p);
  out.applicable = inner_psi >= 1.0 && multiplier >= 1.0;
  return out;
}

double csorgo_threshold(double eps, double lambda, const SeriesSpec& var_spec, double W) {
  if (!(eps > 0.0) || eps > 1.0) {
    throw HypothesisError("hypothesis violated: 0 < eps <= 1 required by the Csorgo-type threshold");
  }
  if (var_spec.p != 2.0) {
    throw HypothesisError("hypothesis violated: the Csorgo-type threshold uses variances (p = 2)");
  }
  return chen_sung_threshold(eps / 2.0, lambda / 2.0, var_spec, W);
}

}  // namespace slln

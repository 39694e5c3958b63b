#include "slln/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace slln {

void BlockContext::validate() const {
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must be > 1");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  if (!(W > 0.0)) throw std::invalid_argument("W must be > 0");
  if (z.empty() || z[0] != 0.0) throw std::invalid_argument("z must start with z_0 = 0");
  for (std::size_t n = 1; n < z.size(); ++n) {
    const double ratio = z[n] / static_cast<double>(n);
    if (!(ratio >= 0.0) || ratio > W) {
      throw std::invalid_argument("z_n / n must lie in [0, W] (n = " + std::to_string(n) + ")");
    }
  }
}

std::int64_t BlockContext::band_count() const {
  return static_cast<std::int64_t>(std::floor(W / delta));
}

std::int64_t BlockContext::band_of(std::int64_t n) const {
  const double ratio = z.at(static_cast<std::size_t>(n)) / static_cast<double>(n);
  auto s = static_cast<std::int64_t>(std::floor(ratio / delta));
  // floor(ratio / delta) can land one band off when the division rounds.
  if (ratio < static_cast<double>(s) * delta) --s;
  if (ratio >= static_cast<double>(s + 1) * delta) ++s;
  return std::clamp<std::int64_t>(s, 0, band_count());
}

BlockContext make_block_context(double alpha, double delta, double W, std::span<const double> means) {
  BlockContext ctx{alpha, delta, W, {}};
  ctx.z.resize(means.size() + 1, 0.0);
  for (std::size_t i = 0; i < means.size(); ++i) ctx.z[i + 1] = ctx.z[i] + means[i];
  ctx.validate();
  return ctx;
}

BlockRange block_range(double alpha, std::int64_t m) {
  if (m < 0) throw std::invalid_argument("block index must be nonnegative");
  const double lo = std::pow(alpha, static_cast<double>(m));
  const double hi = std::pow(alpha, static_cast<double>(m + 1));
  if (!(hi < 9.0e15)) throw std::out_of_range("block range exceeds exact integer range");
  return {static_cast<std::int64_t>(std::ceil(lo)), static_cast<std::int64_t>(std::ceil(hi)) - 1};
}

std::int64_t block_exponent(double alpha, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("block_exponent needs n >= 1");
  auto p = static_cast<std::int64_t>(std::floor(std::log(static_cast<double>(n)) / std::log(alpha)));
  p = std::max<std::int64_t>(p, 0);
  const auto nd = static_cast<double>(n);
  while (p > 0 && std::pow(alpha, static_cast<double>(p)) > nd) --p;
  while (std::pow(alpha, static_cast<double>(p + 1)) <= nd) ++p;
  return p;
}

namespace {

bool in_band(const BlockContext& ctx, std::int64_t n, std::int64_t s) {
  const double ratio = ctx.z[static_cast<std::size_t>(n)] / static_cast<double>(n);
  return ratio >= static_cast<double>(s) * ctx.delta && ratio < static_cast<double>(s + 1) * ctx.delta;
}

std::vector<std::int64_t> scan_block(const BlockContext& ctx, std::int64_t s, BlockRange range) {
  std::vector<std::int64_t> out;
  for (std::int64_t n = std::max<std::int64_t>(range.first, 1); n <= range.last; ++n) {
    if (in_band(ctx, n, s)) out.push_back(n);
  }
  return out;
}

void check_band(const BlockContext& ctx, std::int64_t s) {
  if (s < 0 || s > ctx.band_count()) throw std::invalid_argument("band s outside [0, floor(W/delta)]");
}

}  // namespace

std::vector<std::int64_t> block_members(const BlockContext& ctx, std::int64_t s, std::int64_t m) {
  check_band(ctx, s);
  const BlockRange range = block_range(ctx.alpha, m);
  if (range.last > ctx.horizon()) {
    throw std::out_of_range("block " + std::to_string(m) + " needs z up to " + std::to_string(range.last) +
                            ", have " + std::to_string(ctx.horizon()));
  }
  return scan_block(ctx, s, range);
}

KPair k_pm(const BlockContext& ctx, std::int64_t s, std::int64_t m) {
  const auto members = block_members(ctx, s, m);
  if (members.empty()) {
    const auto f = static_cast<std::int64_t>(std::floor(std::pow(ctx.alpha, static_cast<double>(m))));
    return {f, f};
  }
  return {members.front(), members.back()};
}

SandwichResult sandwich_check(std::span<const double> X, const BlockContext& ctx, std::int64_t m,
                              std::optional<std::int64_t> band) {
  const auto N = static_cast<std::int64_t>(X.size());
  if (m < 1 || m > N) throw std::out_of_range("sandwich index outside the sequence");
  if (ctx.horizon() < N) throw std::invalid_argument("z shorter than X");

  std::vector<double> S(static_cast<std::size_t>(N) + 1, 0.0);
  for (std::int64_t i = 1; i <= N; ++i) S[i] = S[i - 1] + X[i - 1];

  SandwichResult r;
  r.band = band.value_or(ctx.band_of(m));
  check_band(ctx, r.band);
  r.exponent = block_exponent(ctx.alpha, m);

  BlockRange range = block_range(ctx.alpha, r.exponent);
  if (range.last > N) {
    range.last = N;
    r.block_truncated = true;
  }
  const auto members = scan_block(ctx, r.band, range);
  if (members.empty()) {
    r.block_empty = true;
    const auto f = static_cast<std::int64_t>(std::floor(std::pow(ctx.alpha, static_cast<double>(r.exponent))));
    r.k = {f, f};
  } else {
    r.k = {members.front(), members.back()};
  }

  const double a = ctx.alpha;
  const auto km = static_cast<double>(r.k.minus);
  const auto kp = static_cast<double>(r.k.plus);
  const auto md = static_cast<double>(m);
  r.lower = -ctx.delta - (1.0 - 1.0 / a) * ctx.W + (S[r.k.minus] - ctx.z[r.k.minus]) / (a * km);
  r.middle = (S[m] - ctx.z[m]) / md;
  r.upper = a * (S[r.k.plus] - ctx.z[r.k.plus]) / kp + (a - 1.0) * ctx.W + ctx.delta;

  const double slack = 1e-12 * (1.0 + std::abs(r.lower) + std::abs(r.middle) + std::abs(r.upper));
  if (r.lower > r.middle + slack) {
    r.holds = false;
    r.violated = SandwichSide::kLower;
  } else if (r.middle > r.upper + slack) {
    r.holds = false;
    r.violated = SandwichSide::kUpper;
  }
  return r;
}

}  // namespace slln

#include "slln/families.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "slln/numeric.hpp"

namespace slln {

namespace {

constexpr int kMaxSubsetBits = 24;

/// sum_{n >= N} n^-s by Euler-Maclaurin with two Bernoulli corrections.
double zeta_tail_from(double s, double N) {
  return std::pow(N, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(N, -s) + s * std::pow(N, -s - 1.0) / 12.0 -
         s * (s + 1.0) * (s + 2.0) * std::pow(N, -s - 3.0) / 720.0;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate_discrete(const DiscreteDist& d) {
  if (d.values.empty() || d.values.size() != d.probs.size()) {
    throw std::invalid_argument("discrete distribution needs matching nonempty values and probs");
  }
  double total = 0.0;
  for (double p : d.probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("discrete probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("discrete probabilities must sum to 1");
}

void validate_subset_bits(int k) {
  if (k < 1 || k > kMaxSubsetBits) {
    throw std::invalid_argument("subset-product family needs 1 <= k <= " + std::to_string(kMaxSubsetBits));
  }
}

}  // namespace

double zeta(double s) {
  if (!(s > 1.0)) throw std::invalid_argument("zeta needs s > 1");
  constexpr int kTerms = 1000000;
  CompensatedSum acc;
  // smallest terms first
  for (int n = kTerms - 1; n >= 1; --n) acc.add(std::pow(static_cast<double>(n), -s));
  acc.add(zeta_tail_from(s, kTerms));
  return acc.value();
}

ZetaConstants zeta_constants(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be positive");
  ZetaConstants k;
  k.delta = delta;
  k.c = 1.0 / zeta(3.0 + delta);
  k.mu = k.c * zeta(2.0 + delta);
  k.second_moment = k.c * zeta(1.0 + delta);
  k.w = k.c / (std::pow(3.0, 2.0 + delta) * (2.0 + delta));
  k.omega = k.w / 2.0;
  return k;
}

HeavyTailTable::HeavyTailTable(const ZetaConstants& consts) : consts_(consts) {
  const double s = 3.0 + consts.delta;
  constexpr double kResidual = 1e-12;
  constexpr double kMaxCutoff = 1e8;
  // Start from the integral estimate and walk to the first K whose tail
  // mass c sum_{n > K} n^-s drops below 1e-12.
  double K = std::floor(std::pow(consts.c / ((s - 1.0) * kResidual), 1.0 / (s - 1.0)));
  K = std::clamp(K, 1.0, kMaxCutoff);
  while (K > 1.0 && consts.c * zeta_tail_from(s, K) < kResidual) K -= 1.0;
  while (consts.c * zeta_tail_from(s, K + 1.0) >= kResidual) {
    K += 1.0;
    if (K > kMaxCutoff) throw std::invalid_argument("heavy-tail cutoff too large; delta too small");
  }

  const auto cutoff = static_cast<std::size_t>(K);
  cdf_.resize(cutoff);
  CompensatedSum acc;
  for (std::size_t n = 1; n <= cutoff; ++n) {
    acc.add(consts.c * std::pow(static_cast<double>(n), -s));
    cdf_[n - 1] = acc.value();
  }
  residual_mass_ = consts.c * zeta_tail_from(s, K + 1.0);
  mean_bias_bound_ = consts.c * zeta_tail_from(s - 1.0, K + 1.0);
  cdf_.back() = 1.0;
}

std::int64_t HeavyTailTable::sample(double u) const {
  if (u < cdf_[0]) return 1;
  const auto it = std::upper_bound(cdf_.begin() + 1, cdf_.end(), u);
  return static_cast<std::int64_t>(it - cdf_.begin()) + 1;
}

std::int64_t heavy_tail_sample(const ZetaConstants& consts, double u) {
  if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("u must lie in [0, 1)");
  return HeavyTailTable(consts).sample(u);
}

std::vector<std::uint32_t> subset_masks(int k) {
  validate_subset_bits(k);
  std::vector<std::uint32_t> masks;
  masks.reserve((std::size_t{1} << k) - 1);
  for (int size = 1; size <= k; ++size) {
    // Lexicographic combinations of {0..k-1} choose size.
    std::vector<int> idx(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
      std::uint32_t mask = 0;
      for (int e : idx) mask |= 1U << e;
      masks.push_back(mask);
      int pos = size - 1;
      while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == k - size + pos) --pos;
      if (pos < 0) break;
      ++idx[static_cast<std::size_t>(pos)];
      for (int j = pos + 1; j < size; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return masks;
}

std::vector<int> subset_products(std::span<const int> signs, std::size_t length) {
  const int k = static_cast<int>(signs.size());
  validate_subset_bits(k);
  const auto masks = subset_masks(k);
  if (length > masks.size()) throw std::invalid_argument("length exceeds 2^k - 1");
  std::uint32_t negative = 0;
  for (int i = 0; i < k; ++i) {
    const int v = signs[static_cast<std::size_t>(i)];
    if (v != 1 && v != -1) throw std::invalid_argument("signs must be +1 or -1");
    if (v < 0) negative |= 1U << i;
  }
  std::vector<int> out(length);
  for (std::size_t j = 0; j < length; ++j) out[j] = (std::popcount(masks[j] & negative) & 1) ? -1 : 1;
  return out;
}

std::vector<int> pairwise_family_path(int k, std::size_t length, std::uint64_t seed, std::uint64_t stream) {
  validate_subset_bits(k);
  if (length > (std::size_t{1} << k) - 1) throw std::invalid_argument("length exceeds 2^k - 1");
  PairwiseSampler sampler(k);
  sampler.reset(seed, stream);
  std::vector<int> out(length);
  for (auto& v : out) v = static_cast<int>(sampler.next());
  return out;
}

Moments family_moments(const FamilySpec& spec) {
  return std::visit(
      Overloaded{
          [](const IidFamily& f) {
            return std::visit(
                Overloaded{
                    [](const Rademacher&) { return Moments{0.0, 1.0, 1.0}; },
                    [](const UniformDist& u) {
                      Moments m;
                      m.mean = 0.5 * (u.a + u.b);
                      m.variance = (u.b - u.a) * (u.b - u.a) / 12.0;
                      if (u.a >= 0.0) {
                        m.abs_mean = m.mean;
                      } else if (u.b <= 0.0) {
                        m.abs_mean = -m.mean;
                      } else {
                        m.abs_mean = (u.a * u.a + u.b * u.b) / (2.0 * (u.b - u.a));
                      }
                      return m;
                    },
                    [](const DiscreteDist& d) {
                      validate_discrete(d);
                      Moments m;
                      for (std::size_t i = 0; i < d.values.size(); ++i) {
                        m.mean += d.probs[i] * d.values[i];
                        m.abs_mean += d.probs[i] * std::abs(d.values[i]);
                      }
                      for (std::size_t i = 0; i < d.values.size(); ++i) {
                        m.variance += d.probs[i] * (d.values[i] - m.mean) * (d.values[i] - m.mean);
                      }
                      return m;
                    },
                },
                f.dist);
          },
          [](const PairwiseSubsetProduct&) { return Moments{0.0, 1.0, 1.0}; },
          [](const HeavyTailZeta& h) {
            const ZetaConstants k = zeta_constants(h.delta);
            Moments m;
            m.variance = k.second_moment - k.mu * k.mu;
            if (h.centered) {
              // E|X - mu| = 2 E (mu - X)^+ ; only atoms below mu contribute.
              double below = 0.0;
              for (double n = 1.0; n < k.mu; n += 1.0) below += (k.mu - n) * k.c * std::pow(n, -(3.0 + h.delta));
              m.mean = 0.0;
              m.abs_mean = 2.0 * below;
            } else {
              m.mean = k.mu;
              m.abs_mean = k.mu;
            }
            return m;
          },
      },
      spec);
}

std::uint64_t family_max_length(const FamilySpec& spec) {
  if (const auto* p = std::get_if<PairwiseSubsetProduct>(&spec)) {
    validate_subset_bits(p->k);
    return (std::uint64_t{1} << p->k) - 1;
  }
  return std::numeric_limits<std::uint64_t>::max();
}

double family_support_bound(const FamilySpec& spec) {
  return std::visit(
      Overloaded{
          [](const IidFamily& f) {
            return std::visit(Overloaded{
                                  [](const Rademacher&) { return 1.0; },
                                  [](const UniformDist& u) { return std::max(std::abs(u.a), std::abs(u.b)); },
                                  [](const DiscreteDist& d) {
                                    double b = 0.0;
                                    for (double v : d.values) b = std::max(b, std::abs(v));
                                    return b;
                                  },
                              },
                              f.dist);
          },
          [](const PairwiseSubsetProduct&) { return 1.0; },
          [](const HeavyTailZeta&) { return std::numeric_limits<double>::infinity(); },
      },
      spec);
}

double family_deviation_bound(const FamilySpec& spec, double c) {
  auto dev = [c](double lo, double hi) { return std::max(std::abs(lo - c), std::abs(hi - c)); };
  return std::visit(
      Overloaded{
          [&](const IidFamily& f) {
            return std::visit(Overloaded{
                                  [&](const Rademacher&) { return dev(-1.0, 1.0); },
                                  [&](const UniformDist& u) { return dev(u.a, u.b); },
                                  [&](const DiscreteDist& d) {
                                    const auto [lo, hi] = std::minmax_element(d.values.begin(), d.values.end());
                                    return dev(*lo, *hi);
                                  },
                              },
                              f.dist);
          },
          [&](const PairwiseSubsetProduct&) { return dev(-1.0, 1.0); },
          [](const HeavyTailZeta&) { return std::numeric_limits<double>::infinity(); },
      },
      spec);
}

// ---------------------------------------------------------------------------
// key=value text form

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw std::invalid_argument("family key '" + key + "': bad number '" + text + "'");
  }
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    out.push_back(parse_double(key, piece));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw std::invalid_argument("family key '" + key + "': expected true/false, got '" + text + "'");
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace

FamilySpec parse_family(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string token;
  bool first = true;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) {
      if (!first) throw std::invalid_argument("family token '" + token + "' is not key=value");
      kv["family"] = token;
    } else {
      kv[token.substr(0, eq)] = token.substr(eq + 1);
    }
    first = false;
  }
  const auto name_it = kv.find("family");
  if (name_it == kv.end()) throw std::invalid_argument("family spec needs family=<name>");
  const std::string name = name_it->second;
  kv.erase(name_it);

  auto take = [&kv](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  FamilySpec spec;
  if (name == "rademacher") {
    spec = IidFamily{Rademacher{}};
  } else if (name == "uniform") {
    UniformDist u;
    if (auto v = take("a")) u.a = parse_double("a", *v);
    if (auto v = take("b")) u.b = parse_double("b", *v);
    if (!(u.b > u.a)) throw std::invalid_argument("uniform family needs a < b");
    spec = IidFamily{u};
  } else if (name == "discrete") {
    DiscreteDist d;
    auto values = take("values");
    auto probs = take("probs");
    if (!values || !probs) throw std::invalid_argument("discrete family needs values= and probs=");
    d.values = parse_list("values", *values);
    d.probs = parse_list("probs", *probs);
    validate_discrete(d);
    spec = IidFamily{d};
  } else if (name == "pairwise") {
    PairwiseSubsetProduct p;
    if (auto v = take("k")) p.k = static_cast<int>(parse_double("k", *v));
    validate_subset_bits(p.k);
    spec = p;
  } else if (name == "heavy_tail") {
    HeavyTailZeta h;
    if (auto v = take("delta")) h.delta = parse_double("delta", *v);
    if (auto v = take("centered")) h.centered = parse_bool("centered", *v);
    if (!(h.delta > 0.0)) throw std::invalid_argument("heavy_tail family needs delta > 0");
    spec = h;
  } else {
    throw std::invalid_argument("unknown family '" + name + "'");
  }
  if (!kv.empty()) throw std::invalid_argument("unknown family key '" + kv.begin()->first + "' for " + name);
  return spec;
}

std::string to_string(const FamilySpec& spec) {
  return std::visit(
      Overloaded{
          [](const IidFamily& f) {
            return std::visit(Overloaded{
                                  [](const Rademacher&) { return std::string("family=rademacher"); },
                                  [](const UniformDist& u) {
                                    return "family=uniform a=" + format_double(u.a) + " b=" + format_double(u.b);
                                  },
                                  [](const DiscreteDist& d) {
                                    return "family=discrete values=" + join(d.values) + " probs=" + join(d.probs);
                                  },
                              },
                              f.dist);
          },
          [](const PairwiseSubsetProduct& p) { return "family=pairwise k=" + std::to_string(p.k); },
          [](const HeavyTailZeta& h) {
            return "family=heavy_tail delta=" + format_double(h.delta) +
                   " centered=" + (h.centered ? "true" : "false");
          },
      },
      spec);
}

// ---------------------------------------------------------------------------
// Samplers

DiscreteSampler::DiscreteSampler(const DiscreteDist& d) {
  validate_discrete(d);
  auto cdf = std::make_shared<std::vector<double>>(d.probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < d.probs.size(); ++i) {
    acc += d.probs[i];
    (*cdf)[i] = acc;
  }
  cdf->back() = 1.0;
  cdf_ = std::move(cdf);
  values_ = std::make_shared<const std::vector<double>>(d.values);
}

double DiscreteSampler::next() {
  const double u = stream_.next_uniform();
  const auto it = std::upper_bound(cdf_->begin(), cdf_->end(), u);
  return (*values_)[static_cast<std::size_t>(it - cdf_->begin())];
}

PairwiseSampler::PairwiseSampler(int k)
    : k_(k), masks_(std::make_shared<const std::vector<std::uint32_t>>(subset_masks(k))) {}

void PairwiseSampler::reset(std::uint64_t seed, std::uint64_t stream) {
  const CounterRng rng(seed, stream);
  negative_ = static_cast<std::uint32_t>(rng.word(0) & ((std::uint64_t{1} << k_) - 1));
  index_ = 0;
}

double PairwiseSampler::next() {
  if (index_ >= masks_->size()) throw std::out_of_range("subset-product family exhausted");
  return (std::popcount((*masks_)[index_++] & negative_) & 1) ? -1.0 : 1.0;
}

PathSampler make_sampler(const FamilySpec& spec) {
  return std::visit(
      Overloaded{
          [](const IidFamily& f) -> PathSampler {
            return std::visit(Overloaded{
                                  [](const Rademacher&) -> PathSampler { return RademacherSampler{}; },
                                  [](const UniformDist& u) -> PathSampler { return UniformSampler(u); },
                                  [](const DiscreteDist& d) -> PathSampler { return DiscreteSampler(d); },
                              },
                              f.dist);
          },
          [](const PairwiseSubsetProduct& p) -> PathSampler { return PairwiseSampler(p.k); },
          [](const HeavyTailZeta& h) -> PathSampler {
            auto table = std::make_shared<const HeavyTailTable>(zeta_constants(h.delta));
            return HeavyTailSampler(std::move(table), h.centered);
          },
      },
      spec);
}

std::vector<double> sample_path(const FamilySpec& spec, std::size_t length, std::uint64_t seed,
                                std::uint64_t stream) {
  if (length < 1) throw std::invalid_argument("path length must be >= 1");
  if (length > family_max_length(spec)) throw std::invalid_argument("path longer than the family allows");
  PathSampler sampler = make_sampler(spec);
  std::vector<double> out(length);
  std::visit(
      [&](auto& s) {
        s.reset(seed, stream);
        for (auto& v : out) v = s.next();
      },
      sampler);
  return out;
}

}  // namespace slln

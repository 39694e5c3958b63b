// slln: command-line front end for the rate formulas and the Monte-Carlo
// checks. Exit codes: 0 computed/verified, 1 violated, 2 inconclusive or
// vacuous, 64 usage or hypothesis error.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "slln/blocks.hpp"
#include "slln/families.hpp"
#include "slln/harness.hpp"
#include "slln/kronecker.hpp"
#include "slln/rate.hpp"
#include "slln/report.hpp"

using nlohmann::json;
using namespace slln;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolated = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitUsage = 64;

struct Params {
  // scalar inputs
  std::int64_t n = 10000;
  double eps = 1.0;
  double lambda = 0.1;
  double delta = 1.0;
  double r = -0.5;
  double p = 2.0;
  double W = 1.0;
  std::optional<double> Gamma;
  std::optional<double> sigma2;
  std::optional<double> tau;
  double mu = 1.0;
  double alpha = 2.0;
  double gamma = 1.0;
  double bracket_hi = 1e6;
  std::string kind = "pairwise";
  std::string theorem = "chen_sung";
  bool verify = false;
  // simulation
  std::string family = "rademacher";
  std::string center = "zero";
  std::int64_t horizon = 0;
  std::uint64_t paths = 10000;
  std::uint64_t seed = 1;
  std::int64_t n_max = 10000;
  bool sweep = false;
  double budget = 1e10;
  unsigned workers = 0;
  // deterministic checks
  std::int64_t check_upto = 10000;
  std::int64_t length = 256;
  std::int64_t negative_at = 0;
  double negative_value = -5.0;
  double sandwich_alpha = 1.5;
  double sandwich_delta = 0.25;
  std::uint64_t sandwich_seed = 7;
  // output
  std::string format = "text";
  std::string output;
};

class Emitter {
 public:
  Emitter(const std::string& format, const std::string& path, json config)
      : format_(format), config_(std::move(config)) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::invalid_argument("cannot open output file '" + path + "'");
    }
  }

  std::ostream& os() { return file_ ? *file_ : std::cout; }
  const std::string& format() const { return format_; }

  /// Plain scalar result.
  void scalar(const std::string& name, double value, json extra = json::object()) {
    if (format_ == "json") {
      extra[name] = json_g9(value);
      record(std::move(extra));
    } else if (format_ == "csv") {
      config_line();
      os() << "quantity,value\n" << name << ',' << format_g9(value) << '\n';
      for (auto& [k, v] : extra.items()) os() << k << ',' << csv_value(v) << '\n';
    } else {
      os() << format_g9(value) << '\n';
    }
  }

  /// One Monte-Carlo result row.
  void row(const ResultRow& r, const json& extra = json::object()) {
    if (format_ == "json") {
      json result = to_json(r);
      for (auto& [k, v] : extra.items()) result[k] = v;
      record(std::move(result));
    } else if (format_ == "csv") {
      config_line();
      os() << csv_header() << '\n' << csv_row(r) << '\n';
    } else {
      os() << "verdict=" << r.verdict << " hits=" << r.hits << " paths=" << r.paths << " p_hat=" << format_g9(r.p_hat)
           << " ci=[" << format_g9(r.ci_low) << ", " << format_g9(r.ci_high) << "] analytic=" << format_g9(r.analytic)
           << " horizon=" << r.horizon << '\n';
      for (auto& [k, v] : extra.items()) os() << k << '=' << csv_value(v) << '\n';
    }
  }

  /// A table with its own header (csv/text) or one record with a rows array.
  void table(const std::vector<std::string>& header, const std::vector<std::vector<json>>& rows,
             const json& extra = json::object()) {
    if (format_ == "json") {
      json result = extra;
      json arr = json::array();
      for (const auto& row : rows) {
        json obj;
        for (std::size_t i = 0; i < header.size(); ++i) obj[header[i]] = row[i];
        arr.push_back(obj);
      }
      result["rows"] = arr;
      record(std::move(result));
      return;
    }
    if (format_ == "csv") config_line();
    for (std::size_t i = 0; i < header.size(); ++i) os() << (i ? "," : "") << header[i];
    os() << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os() << (i ? "," : "") << csv_value(row[i]);
      os() << '\n';
    }
    if (format_ == "text") {
      for (auto& [k, v] : extra.items()) os() << k << '=' << csv_value(v) << '\n';
    }
  }

  /// One {"config", "result"} JSON line.
  void record(json result) {
    json rec;
    rec["config"] = config_;
    rec["result"] = std::move(result);
    write_json_line(os(), rec);
  }

 private:
  static std::string csv_value(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) return format_g9(v.get<double>());
    return v.dump();
  }

  void config_line() { os() << "# config " << config_.dump() << '\n'; }

  std::string format_;
  json config_;
  std::unique_ptr<std::ofstream> file_;
};

/// Numbers and booleans keep their type; everything else stays a string.
json typed_value(const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  json v = json::parse(text, nullptr, false);
  if (!v.is_discarded() && v.is_number()) return v;
  return text;
}

/// Every option of the subcommand with its effective value. Unset optional
/// values are left out, and so are the worker count and output path, which
/// do not influence results; records then compare equal across them.
json resolved_config(const CLI::App& sub) {
  json cfg;
  cfg["subcommand"] = sub.get_name();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "workers" || name == "output") continue;
    const std::string value = opt->count() > 0 ? opt->results().back() : opt->get_default_str();
    if (!value.empty()) cfg[name] = typed_value(value);
  }
  return cfg;
}

int exit_for(Verdict v) {
  switch (v) {
    case Verdict::kVerified:
      return kExitOk;
    case Verdict::kViolated:
      return kExitViolated;
    default:
      return kExitInconclusive;
  }
}

Center parse_center(const std::string& s) { return s == "family-mean" ? Center::kFamilyMean : Center::kZero; }

RunOptions run_options(const Params& p) { return RunOptions{p.workers, p.budget}; }

SeriesSpec series_from(const Params& p) {
  const double Gamma = p.Gamma ? *p.Gamma : std::max(1.0, p.gamma * zeta(p.p));
  return constant_series(p.gamma, p.p, Gamma);
}

Rate rate_from(const Params& p) {
  const double sigma2 = p.sigma2.value_or(1.0);
  const double tau = p.tau.value_or(1.0);
  if (p.kind == "geometric") return geometric_tail_rate(p.eps, p.alpha, sigma2);
  if (p.kind == "delta") return delta_rate(p.eps, p.mu, sigma2);
  if (p.kind == "pairwise") return pairwise_rate(p.eps, tau, sigma2);
  if (p.kind == "genquant-geometric") {
    return genquant_threshold(p.eps, p.W, [sigma2](double e, double, double a, double l) {
      return geometric_tail_rate(e, a, sigma2)(l);
    });
  }
  if (p.kind == "chi") return chi_rate(p.eps, p.alpha, series_from(p));
  throw std::invalid_argument("unknown rate kind '" + p.kind + "'");
}

SupTailQuery query_from(const Params& p) {
  SupTailQuery q;
  q.family = parse_family(p.family);
  q.n = p.n;
  q.eps = p.eps;
  q.horizon = p.horizon == 0 ? 32 * p.n : p.horizon;
  q.paths = p.paths;
  q.seed = p.seed;
  q.center = parse_center(p.center);
  return q;
}

json estimate_extra(const SupTailEstimate& e) {
  return {{"horizon_used", e.horizon_used}, {"truncation_note", e.truncation_note}, {"stabilized", e.stabilized}};
}

// ---------------------------------------------------------------------------

int cmd_bound(const Params& p, Emitter& out) {
  MomentProfile profile;
  profile.sigma2 = p.sigma2.value_or(1.0);
  profile.tau = p.tau.value_or(1.0);
  profile.validate();
  const double value = slln_upper_bound(static_cast<double>(p.n), p.eps, profile);
  out.scalar("bound", value,
             {{"hajek_renyi", json_g9(hajek_renyi_bound(static_cast<double>(p.n), p.eps, profile.sigma2))},
              {"vacuous", value >= 1.0}});
  return kExitOk;
}

int cmd_rate(const Params& p, Emitter& out) {
  const Rate rate = rate_from(p);
  out.scalar("threshold", rate(p.lambda), {{"strictly_decreasing", rate.strictly_decreasing()}});
  return kExitOk;
}

int cmd_invert(const Params& p, Emitter& out) {
  const Rate rate = rate_from(p);
  out.scalar("lambda", invert_rate(rate, static_cast<double>(p.n), p.bracket_hi));
  return kExitOk;
}

int cmd_threshold(const Params& p, Emitter& out) {
  const SeriesSpec spec = series_from(p);
  ThresholdKind kind;
  if (p.theorem == "chen_sung") {
    kind = ThresholdKind::kChenSung;
  } else if (p.theorem == "csorgo") {
    kind = ThresholdKind::kCsorgo;
  } else {
    throw std::invalid_argument("unknown theorem '" + p.theorem + "' (chen_sung or csorgo)");
  }
  const double n_star =
      kind == ThresholdKind::kCsorgo ? csorgo_threshold(p.eps, p.lambda, spec, p.W) : chen_sung_threshold(p.eps, p.lambda, spec, p.W);
  const ClosedFormThreshold closed = kind == ThresholdKind::kCsorgo
                                         ? chen_sung_closed_form(p.eps / 2.0, p.lambda / 2.0, spec, p.W)
                                         : chen_sung_closed_form(p.eps, p.lambda, spec, p.W);
  json extra = {{"closed_form", json_g9(closed.value)},
                {"closed_form_applicable", closed.applicable},
                {"A_p", json_g9(closed.A_p)},
                {"B_p", json_g9(closed.B_p)}};
  if (!p.verify) {
    out.scalar("n_star", n_star, extra);
    return kExitOk;
  }
  const BoundReport report = verify_threshold(kind, spec, p.W, p.eps, p.lambda, parse_family(p.family), p.paths,
                                              p.seed, run_options(p));
  extra["n_star"] = json_g9(report.n_star);
  if (!report.note.empty()) extra["note"] = report.note;
  const auto n = std::isfinite(report.n_star) && report.n_star < 9.2e18 ? static_cast<std::int64_t>(report.n_star) : 0;
  out.row(make_row(p.family, n, p.eps, report), extra);
  return exit_for(report.verdict);
}

int cmd_simulate(const Params& p, Emitter& out) {
  const SupTailQuery q = query_from(p);
  const SupTailEstimate e = p.sweep ? horizon_sweep(q, run_options(p)) : estimate_sup_tail(q, run_options(p));
  BoundReport report;
  report.empirical = e;
  report.analytic = std::nan("");
  ResultRow row = make_row(p.family, p.n, p.eps, report);
  row.verdict = e.stabilized ? "estimated" : "inconclusive";
  out.row(row, estimate_extra(e));
  return e.stabilized ? kExitOk : kExitInconclusive;
}

int cmd_verify_upper(const Params& p, Emitter& out) {
  const SupTailQuery q = query_from(p);
  MomentProfile profile = centered_profile(q.family, q.center);
  if (p.sigma2) profile.sigma2 = *p.sigma2;
  if (p.tau) profile.tau = *p.tau;
  const BoundReport report = verify_upper(q, profile, run_options(p));
  json extra = estimate_extra(report.empirical);
  extra["sigma2"] = json_g9(profile.sigma2);
  extra["tau"] = json_g9(profile.tau);
  out.row(make_row(p.family, p.n, p.eps, report), extra);
  return exit_for(report.verdict);
}

int cmd_verify_lower(const Params& p, Emitter& out) {
  const BoundReport report = verify_lower(p.delta, p.n, p.eps, p.paths, p.seed, run_options(p), p.horizon);
  const std::string family = to_string(FamilySpec{HeavyTailZeta{p.delta, true}});
  out.row(make_row(family, p.n, p.eps, report), estimate_extra(report.empirical));
  return exit_for(report.verdict);
}

int cmd_baum_katz(const Params& p, Emitter& out) {
  const BaumKatzResult bk = baum_katz_partial(p.r, p.eps, parse_family(p.family), p.n_max, p.paths, p.seed,
                                              run_options(p), parse_center(p.center));
  std::vector<std::vector<json>> rows;
  bool below = true;
  for (const auto& pt : bk.points) {
    below = below && pt.ci_low <= pt.majorant && pt.ci_low <= pt.majorant_literal;
    rows.push_back({pt.N, json_g9(pt.empirical), json_g9(pt.ci_low), json_g9(pt.ci_high), json_g9(pt.majorant),
                    json_g9(pt.majorant_literal)});
  }
  out.table({"N", "empirical", "ci_low", "ci_high", "majorant", "majorant_literal"}, rows,
            {{"horizon", bk.horizon},
             {"sigma2", json_g9(bk.profile.sigma2)},
             {"tau", json_g9(bk.profile.tau)},
             {"verdict", below ? "verified" : "violated"}});
  return below ? kExitOk : kExitViolated;
}

/// x_i = 2^-i, a_n = n, phi(eps) = ceil(log2(1/eps)), S = 1.
int cmd_kronecker_demo(const Params& p, Emitter& out) {
  if (!(p.eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const Rate phi([](double e) { return std::max(0.0, std::ceil(std::log2(1.0 / e))); }, Monotonicity::kNonincreasing);
  const IndexDominator dom{[](double w) { return std::max(1.0, std::ceil(w)); }, [](double n) { return n; }};
  const double K = kronecker_rate(phi, dom, 1.0)(p.eps);
  const std::int64_t upto = std::max<std::int64_t>(p.check_upto, static_cast<std::int64_t>(K));
  std::vector<double> x(static_cast<std::size_t>(upto)), a(static_cast<std::size_t>(upto));
  for (std::int64_t i = 1; i <= upto; ++i) {
    x[static_cast<std::size_t>(i - 1)] = std::ldexp(1.0, static_cast<int>(-std::min<std::int64_t>(i, 1074)));
    a[static_cast<std::size_t>(i - 1)] = static_cast<double>(i);
  }
  const auto start = static_cast<std::int64_t>(std::max(1.0, K));
  double worst = 0.0;
  for (std::int64_t n = start; n <= upto; ++n) worst = std::max(worst, kronecker_oracle(x, a, n));
  const bool holds = worst <= p.eps;
  out.scalar("K", K,
             {{"oracle_at_K", json_g9(kronecker_oracle(x, a, start))},
              {"max_oracle_beyond_K", json_g9(worst)},
              {"checked_upto", upto},
              {"holds", holds}});
  return holds ? kExitOk : kExitViolated;
}

/// X uniform on [0, 2] (mean 1), optionally with one negative entry.
int cmd_sandwich_check(const Params& p, Emitter& out) {
  if (p.length < 2) throw std::invalid_argument("length must be >= 2");
  std::vector<double> X = sample_path(IidFamily{UniformDist{0.0, 2.0}}, static_cast<std::size_t>(p.length),
                                 p.sandwich_seed, 0);
  if (p.negative_at > 0) {
    if (p.negative_at > p.length) throw std::invalid_argument("negative-at beyond length");
    X[static_cast<std::size_t>(p.negative_at - 1)] = p.negative_value;
  }
  const std::vector<double> means(X.size(), 1.0);
  const BlockContext ctx = make_block_context(p.sandwich_alpha, p.sandwich_delta, p.W, means);
  std::int64_t violations = 0;
  std::int64_t first_violation = 0;
  std::string side;
  for (std::int64_t m = 1; m <= p.length; ++m) {
    const SandwichResult res = sandwich_check(X, ctx, m);
    if (!res.holds) {
      if (violations++ == 0) {
        first_violation = m;
        side = res.violated == SandwichSide::kLower ? "lower" : "upper";
      }
    }
  }
  json extra = {{"checked", p.length}, {"first_violation", first_violation}};
  if (!side.empty()) extra["violated_side"] = side;
  extra["violations"] = violations;
  if (out.format() == "json") {
    out.record(std::move(extra));
  } else {
    out.scalar("violations", static_cast<double>(violations), extra);
  }
  return violations == 0 ? kExitOk : kExitViolated;
}

// ---------------------------------------------------------------------------

/// Expands `--config FILE` (INI key=value) into flags placed before the
/// user's own flags; later flags win, so command-line values take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    std::size_t erase = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      erase = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      erase = 1;
    } else {
      continue;
    }
    std::vector<std::string> injected;
    for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(path)) {
      if (item.name == "++" || item.name == "--") continue;
      injected.push_back("--" + item.name);
      for (const auto& v : item.inputs) injected.push_back(v);
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + erase));
    // Flags go right after the subcommand name, ahead of explicit flags.
    const std::size_t insert_at = args.empty() ? 0 : 1;
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(std::min(insert_at, args.size())), injected.begin(),
                injected.end());
    return args;
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit rates for strong-law large-deviation probabilities, with Monte-Carlo checks", "slln"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.footer("A --config FILE of key=value lines may precede flags; explicit flags take precedence.\n"
             "SLLN_WORKERS sets the default worker count.");

  Params p;
  int exit_code = kExitOk;

  auto add_output = [&p](CLI::App* sub) {
    sub->add_option("--format", p.format, "text, json or csv")
        ->check(CLI::IsMember({"text", "json", "csv"}))
        ->capture_default_str();
    sub->add_option("--output", p.output, "Write to this file instead of stdout");
  };
  auto add_sim = [&p](CLI::App* sub) {
    sub->add_option("--family", p.family, "Family spec, e.g. 'family=heavy_tail delta=1 centered=true'")
        ->capture_default_str();
    sub->add_option("--n", p.n, "Start index n")->capture_default_str();
    sub->add_option("--eps", p.eps, "Deviation threshold eps")->capture_default_str();
    sub->add_option("--horizon", p.horizon, "Truncation index M (0: 32 n)")->capture_default_str();
    sub->add_option("--paths", p.paths, "Number of simulated paths")->capture_default_str();
    sub->add_option("--seed", p.seed, "Random seed")->capture_default_str();
    sub->add_option("--center", p.center, "zero or family-mean")
        ->check(CLI::IsMember({"zero", "family-mean"}))
        ->capture_default_str();
  };
  auto add_run = [&p](CLI::App* sub) {
    sub->add_option("--workers", p.workers, "Worker threads (0: SLLN_WORKERS or hardware)");
    sub->add_option("--budget", p.budget, "Cap on paths * horizon")->capture_default_str();
  };
  auto add_rate_params = [&p](CLI::App* sub) {
    sub->add_option("--kind", p.kind, "geometric, delta, pairwise, genquant-geometric or chi")
        ->check(CLI::IsMember({"geometric", "delta", "pairwise", "genquant-geometric", "chi"}))
        ->capture_default_str();
    sub->add_option("--eps", p.eps, "eps")->capture_default_str();
    sub->add_option("--alpha", p.alpha, "Block ratio alpha")->capture_default_str();
    sub->add_option("--sigma2", p.sigma2, "Variance bound (default 1)");
    sub->add_option("--tau", p.tau, "Bound on E|X| (default 1)");
    sub->add_option("--mu", p.mu, "Mean bound")->capture_default_str();
    sub->add_option("--W", p.W, "Bound on z_n / n")->capture_default_str();
    sub->add_option("--p", p.p, "Moment order (chi)")->capture_default_str();
    sub->add_option("--gamma", p.gamma, "Constant gamma_m (chi)")->capture_default_str();
    sub->add_option("--Gamma", p.Gamma, "Series bound (default max(1, gamma zeta(p)))");
  };

  std::vector<std::pair<CLI::App*, int (*)(const Params&, Emitter&)>> commands;

  auto* bound = app.add_subcommand("bound", "Sup-tail bound for pairwise independent mean-zero variables");
  bound->add_option("--n", p.n, "Index n")->capture_default_str();
  bound->add_option("--eps", p.eps, "eps")->capture_default_str();
  bound->add_option("--sigma2", p.sigma2, "Variance bound (default 1)");
  bound->add_option("--tau", p.tau, "Bound on E|X| (default 1)");
  add_output(bound);
  commands.emplace_back(bound, cmd_bound);

  auto* rate = app.add_subcommand("rate", "Evaluate a rate at lambda");
  add_rate_params(rate);
  rate->add_option("--lambda", p.lambda, "Tolerance lambda")->capture_default_str();
  add_output(rate);
  commands.emplace_back(rate, cmd_rate);

  auto* invert = app.add_subcommand("invert", "Invert a strictly decreasing rate at n");
  add_rate_params(invert);
  invert->add_option("--n", p.n, "Target threshold n")->capture_default_str();
  invert->add_option("--bracket-hi", p.bracket_hi, "Upper end of the bisection bracket")->capture_default_str();
  add_output(invert);
  commands.emplace_back(invert, cmd_invert);

  auto* threshold = app.add_subcommand("threshold", "Chen-Sung or Csorgo-type threshold n* for gamma_m = const");
  threshold->add_option("--theorem", p.theorem, "chen_sung or csorgo")->capture_default_str();
  threshold->add_option("--eps", p.eps, "eps in (0, 1]")->capture_default_str();
  threshold->add_option("--lambda", p.lambda, "Target probability lambda")->capture_default_str();
  threshold->add_option("--p", p.p, "Moment order p > 1")->capture_default_str();
  threshold->add_option("--W", p.W, "Bound on z_n / n (>= 1)")->capture_default_str();
  threshold->add_option("--gamma", p.gamma, "Constant gamma_m")->capture_default_str();
  threshold->add_option("--Gamma", p.Gamma, "Series bound (default max(1, gamma zeta(p)))");
  threshold->add_flag("--verify", p.verify, "Simulate at n* when it fits the budget");
  threshold->add_option("--family", p.family, "Family simulated by --verify")->capture_default_str();
  threshold->add_option("--paths", p.paths, "Paths for --verify")->capture_default_str();
  threshold->add_option("--seed", p.seed, "Seed for --verify")->capture_default_str();
  add_run(threshold);
  add_output(threshold);
  commands.emplace_back(threshold, cmd_threshold);

  auto* simulate = app.add_subcommand("simulate", "Estimate the truncated sup-tail probability");
  add_sim(simulate);
  simulate->add_flag("--sweep", p.sweep, "Double the horizon until the estimate stabilizes");
  add_run(simulate);
  add_output(simulate);
  commands.emplace_back(simulate, cmd_simulate);

  auto* upper = app.add_subcommand("verify-upper", "Check the sup-tail upper bound by simulation");
  add_sim(upper);
  upper->add_option("--sigma2", p.sigma2, "Variance bound (default: family variance)");
  upper->add_option("--tau", p.tau, "Bound on E|X - c| (default: family value)");
  add_run(upper);
  add_output(upper);
  commands.emplace_back(upper, cmd_verify_upper);

  auto* lower = app.add_subcommand("verify-lower", "Check the heavy-tail lower bound by simulation");
  lower->add_option("--delta", p.delta, "Tail exponent delta")->capture_default_str();
  lower->add_option("--n", p.n, "Start index n")->capture_default_str();
  lower->add_option("--eps", p.eps, "eps in (0, 1]")->capture_default_str();
  lower->add_option("--horizon", p.horizon, "Truncation index M (0: 32 n)")->capture_default_str();
  lower->add_option("--paths", p.paths, "Number of simulated paths")->capture_default_str();
  lower->add_option("--seed", p.seed, "Random seed")->capture_default_str();
  add_run(lower);
  add_output(lower);
  commands.emplace_back(lower, cmd_verify_lower);

  auto* bk = app.add_subcommand("baum-katz", "Partial Baum-Katz sums against the analytic majorant");
  bk->add_option("--r", p.r, "Exponent r < 0")->capture_default_str();
  bk->add_option("--eps", p.eps, "eps")->capture_default_str();
  bk->add_option("--family", p.family, "Family spec")->capture_default_str();
  bk->add_option("--n-max", p.n_max, "Largest N")->capture_default_str();
  bk->add_option("--paths", p.paths, "Number of simulated paths")->capture_default_str();
  bk->add_option("--seed", p.seed, "Random seed")->capture_default_str();
  bk->add_option("--center", p.center, "zero or family-mean")
      ->check(CLI::IsMember({"zero", "family-mean"}))
      ->capture_default_str();
  add_run(bk);
  add_output(bk);
  commands.emplace_back(bk, cmd_baum_katz);

  auto* kron = app.add_subcommand("kronecker-demo", "Kronecker index for x_i = 2^-i, a_n = n");
  kron->add_option("--eps", p.eps, "eps")->capture_default_str();
  kron->add_option("--check-upto", p.check_upto, "Check the weighted means up to this n")->capture_default_str();
  add_output(kron);
  commands.emplace_back(kron, cmd_kronecker_demo);

  auto* sandwich = app.add_subcommand("sandwich-check", "Block sandwich on a uniform [0, 2] sequence");
  sandwich->add_option("--length", p.length, "Sequence length")->capture_default_str();
  sandwich->add_option("--alpha", p.sandwich_alpha, "Block ratio alpha > 1")->capture_default_str();
  sandwich->add_option("--delta", p.sandwich_delta, "Band width delta")->capture_default_str();
  sandwich->add_option("--W", p.W, "Bound on z_n / n")->capture_default_str();
  sandwich->add_option("--seed", p.sandwich_seed, "Random seed")->capture_default_str();
  sandwich->add_option("--negative-at", p.negative_at, "Replace X_i by --negative-value (0: none)")
      ->capture_default_str();
  sandwich->add_option("--negative-value", p.negative_value, "Injected value")->capture_default_str();
  add_output(sandwich);
  commands.emplace_back(sandwich, cmd_sandwich_check);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    for (auto& [sub, fn] : commands) {
      if (sub->parsed()) {
        Emitter out(p.format, p.output, resolved_config(*sub));
        exit_code = fn(p, out);
        out.os().flush();
      }
    }
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::overflow_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return exit_code;
}

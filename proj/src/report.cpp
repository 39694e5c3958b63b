#include "slln/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace slln {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_g9(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

nlohmann::json json_g9(double v) {
  if (!std::isfinite(v)) return format_g9(v);
  return std::stod(format_g9(v));
}

ResultRow make_row(const std::string& family, std::int64_t n, double eps, const BoundReport& report) {
  ResultRow row;
  row.family = family;
  row.n = n;
  row.eps = eps;
  row.horizon = report.empirical.horizon_used;
  row.paths = report.empirical.paths;
  row.hits = report.empirical.hits;
  row.p_hat = report.empirical.p_hat;
  row.ci_low = report.empirical.ci_low;
  row.ci_high = report.empirical.ci_high;
  row.analytic = report.analytic;
  row.verdict = to_string(report.verdict);
  return row;
}

std::string csv_header() { return "family,n,eps,horizon,paths,hits,p_hat,ci_low,ci_high,analytic,verdict"; }

std::string csv_row(const ResultRow& r) {
  return csv_field(r.family) + ',' + std::to_string(r.n) + ',' + format_g9(r.eps) + ',' + std::to_string(r.horizon) +
         ',' + std::to_string(r.paths) + ',' + std::to_string(r.hits) + ',' + format_g9(r.p_hat) + ',' +
         format_g9(r.ci_low) + ',' + format_g9(r.ci_high) + ',' + format_g9(r.analytic) + ',' + csv_field(r.verdict);
}

nlohmann::json to_json(const ResultRow& r) {
  return {
      {"family", r.family},         {"n", r.n},
      {"eps", json_g9(r.eps)},      {"horizon", r.horizon},
      {"paths", r.paths},           {"hits", r.hits},
      {"p_hat", json_g9(r.p_hat)},  {"ci_low", json_g9(r.ci_low)},
      {"ci_high", json_g9(r.ci_high)}, {"analytic", json_g9(r.analytic)},
      {"verdict", r.verdict},
  };
}

void write_json_line(std::ostream& os, const nlohmann::json& record) { os << record.dump() << '\n'; }

}  // namespace slln

#pragma once

// CSV and JSON-lines output. Every real number goes through format_g9, so
// output is byte-stable for a fixed configuration.

#include <cstdint>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "slln/harness.hpp"

namespace slln {

/// printf("%.9g"); non-finite values print as inf, -inf, nan.
std::string format_g9(double v);

/// v rounded through format_g9, for embedding in JSON. Non-finite values
/// become strings.
nlohmann::json json_g9(double v);

struct ResultRow {
  std::string family;
  std::int64_t n = 0;
  double eps = 0.0;
  std::int64_t horizon = 0;
  std::uint64_t paths = 0;
  std::uint64_t hits = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double analytic = 0.0;
  std::string verdict;
};

ResultRow make_row(const std::string& family, std::int64_t n, double eps, const BoundReport& report);

/// family,n,eps,horizon,paths,hits,p_hat,ci_low,ci_high,analytic,verdict
std::string csv_header();
std::string csv_row(const ResultRow& row);

nlohmann::json to_json(const ResultRow& row);

/// Writes `record` as a single line.
void write_json_line(std::ostream& os, const nlohmann::json& record);

}  // namespace slln

#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace ctret {

// One experiment measurement. Unused cell coordinates stay at their
// sentinels and serialize as empty fields.
struct ResultRow {
  std::string experiment;
  std::string family;  // signal family or family pair
  double gamma = std::numeric_limits<double>::quiet_NaN();
  int n = -1;  // interval count
  double delta_mu_ms = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  std::string variant;
  std::uint64_t seed = 0;
  std::string metric;
  double value = std::numeric_limits<double>::quiet_NaN();

  bool operator==(const ResultRow&) const = default;
};

inline constexpr const char* kCsvSchemaLine = "# ctret.results.v1";
inline constexpr const char* kCsvHeaderLine =
    "experiment,family,gamma,n,delta_mu_ms,alpha,variant,seed,metric,value";

// Shortest round-trip decimal representation.
std::string format_double(double v);

void write_rows(std::ostream& out, const std::vector<ResultRow>& rows);
void write_rows(const std::string& path, const std::vector<ResultRow>& rows);

// Throws std::runtime_error on schema or field errors.
std::vector<ResultRow> read_rows(std::istream& in);

}  // namespace ctret

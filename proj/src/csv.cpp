#include "ctret/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ctret {

namespace {

std::string format_u64(std::uint64_t v) {
  char buf[24];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

double parse_double(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw std::runtime_error("bad numeric field: " + s);
  }
  return v;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

void write_rows(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvSchemaLine << '\n' << kCsvHeaderLine << '\n';
  for (const auto& r : rows) {
    out << r.experiment << ',' << r.family << ',' << format_double(r.gamma) << ','
        << (r.n < 0 ? std::string{} : format_u64(static_cast<std::uint64_t>(r.n)))
        << ',' << format_double(r.delta_mu_ms) << ',' << format_double(r.alpha)
        << ',' << r.variant << ',' << format_u64(r.seed) << ',' << r.metric << ','
        << format_double(r.value) << '\n';
  }
}

void write_rows(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  write_rows(out, rows);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<ResultRow> read_rows(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvSchemaLine) {
    throw std::runtime_error("missing or unknown results schema line");
  }
  if (!std::getline(in, line) || line != kCsvHeaderLine) {
    throw std::runtime_error("missing or unknown results header");
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_fields(line);
    if (f.size() != 10) throw std::runtime_error("bad field count in row: " + line);
    ResultRow r;
    r.experiment = f[0];
    r.family = f[1];
    r.gamma = parse_double(f[2]);
    r.n = f[3].empty() ? -1 : static_cast<int>(parse_double(f[3]));
    r.delta_mu_ms = parse_double(f[4]);
    r.alpha = parse_double(f[5]);
    r.variant = f[6];
    r.seed = f[7].empty() ? 0 : std::stoull(f[7]);
    r.metric = f[8];
    r.value = parse_double(f[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace ctret

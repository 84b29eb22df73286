#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctret {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat "key = value" sections:
//   [servo]
//   runs = 20
//   delta_mu_ms = 40, 80, 120
// Keys are looked up as "section.key". Unknown keys are rejected by the CLI.
class Config {
 public:
  Config() = default;

  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const;
  std::vector<int> get_int_list(const std::string& key,
                                const std::vector<int>& fallback) const;
  std::vector<std::string> get_string_list(
      const std::string& key, const std::vector<std::string>& fallback) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace ctret

#include "ctret/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace ctret {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& s) {
  double v;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw ConfigError("config key '" + key + "': bad number '" + s + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (cfg.values_.count(full)) {
      throw ConfigError("duplicate config key '" + full + "'");
    }
    cfg.values_[full] = val;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : to_double(key, it->second);
}

int Config::get_int(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const double v = to_double(key, it->second);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) {
    throw ConfigError("config key '" + key + "': expected integer");
  }
  return i;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::uint64_t v;
  const std::string& s = it->second;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw ConfigError("config key '" + key + "': bad unsigned integer '" + s + "'");
  }
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& s = it->second;
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("config key '" + key + "': expected boolean, got '" + s + "'");
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            const std::vector<double>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (const auto& tok : split_list(it->second)) out.push_back(to_double(key, tok));
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

std::vector<int> Config::get_int_list(const std::string& key,
                                      const std::vector<int>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<int> out;
  for (const auto& tok : split_list(it->second)) {
    const double v = to_double(key, tok);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) {
      throw ConfigError("config key '" + key + "': expected integer list");
    }
    out.push_back(i);
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

std::vector<std::string> Config::get_string_list(
    const std::string& key, const std::vector<std::string>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  auto out = split_list(it->second);
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

}  // namespace ctret

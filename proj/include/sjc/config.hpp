#pragma once

// Flat `key = value` configuration files. Blank lines and `#` comments are
// ignored; keys are unique.

#include <algorithm>
#include <charconv>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sjc {

class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::istream& in) {
    KeyValueConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string body = trim(line);
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos) {
        throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
      }
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
      if (!cfg.entries_.emplace(key, value).second) {
        throw std::invalid_argument("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
      }
    }
    return cfg;
  }

  static KeyValueConfig parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse(in);
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    return parse(in);
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : to_number<double>(key, it->second);
  }

  long long get_int(const std::string& key, long long fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : to_number<long long>(key, it->second);
  }

  unsigned long long get_uint(const std::string& key, unsigned long long fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : to_number<unsigned long long>(key, it->second);
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config key '" + key + "': expected a boolean, got '" + v + "'");
  }

  /// Throws on any key that is neither in `known` nor starts with an ignored prefix.
  void require_known(const std::set<std::string>& known,
                     std::initializer_list<std::string_view> ignored_prefixes = {}) const {
    for (const auto& [key, value] : entries_) {
      if (known.count(key)) continue;
      const bool skipped = std::any_of(ignored_prefixes.begin(), ignored_prefixes.end(),
                                       [&](std::string_view p) { return key.starts_with(p); });
      if (!skipped) throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }

 private:
  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
  }

  template <class T>
  static T to_number(const std::string& key, const std::string& text) {
    T out{};
    const auto r = std::from_chars(text.data(), text.data() + text.size(), out);
    if (r.ec != std::errc{} || r.ptr != text.data() + text.size()) {
      throw std::invalid_argument("config key '" + key + "': cannot parse '" + text + "' as a number");
    }
    return out;
  }

  std::map<std::string, std::string> entries_;
};

}  // namespace sjc

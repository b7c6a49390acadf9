#pragma once

// Scenario parameters: string overrides resolved against declared defaults.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "normreg/error.hpp"

namespace normreg::simulate {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline double to_real(std::string_view s, const std::string& key) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw DomainError("parameter '" + key + "': '" + std::string(s) + "' is not a finite number");
  }
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t k = s.find(sep, start);
    out.push_back(s.substr(start, k == std::string_view::npos ? std::string_view::npos : k - start));
    if (k == std::string_view::npos) break;
    start = k + 1;
  }
  return out;
}

}  // namespace detail

/// Parses "a:b:count" (linear), "log:a:b:count" (log-spaced) or comma lists of those.
inline std::vector<double> parse_grid(std::string_view text, const std::string& key = "grid") {
  std::vector<double> out;
  for (std::string_view item : detail::split(text, ',')) {
    item = detail::trim(item);
    if (item.empty()) throw DomainError("parameter '" + key + "': empty grid entry");
    const auto parts = detail::split(item, ':');
    if (parts.size() == 1) {
      out.push_back(detail::to_real(parts[0], key));
      continue;
    }
    const bool log = detail::trim(parts[0]) == "log";
    const std::size_t off = log ? 1 : 0;
    if (parts.size() != 3 + off) {
      throw DomainError("parameter '" + key + "': expected a:b:count or log:a:b:count, got '" + std::string(item) + "'");
    }
    const double a = detail::to_real(parts[off], key);
    const double b = detail::to_real(parts[off + 1], key);
    const double c = detail::to_real(parts[off + 2], key);
    if (c < 1 || std::floor(c) != c) throw DomainError("parameter '" + key + "': grid count must be a positive integer");
    if (log && !(a > 0.0 && b > 0.0)) throw DomainError("parameter '" + key + "': log grid bounds must be positive");
    const int count = static_cast<int>(c);
    for (int k = 0; k < count; ++k) {
      const double t = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
      // Linear entries are rounded to 12 decimals so 0.5:0.9:9 yields 0.85, not 0.8500000000000001.
      out.push_back(log ? std::exp(std::log(a) + t * (std::log(b) - std::log(a)))
                        : std::round((a + t * (b - a)) * 1e12) / 1e12);
    }
    if (count > 1) out.back() = b;
  }
  return out;
}

/// Reads "key = value" lines; '#' starts a comment.
inline std::map<std::string, std::string> read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path.string() + "'");
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value in '" + path.string() + "'", line_no);
    const std::string key(detail::trim(s.substr(0, eq)));
    const std::string value(detail::trim(s.substr(eq + 1)));
    if (key.empty()) throw ParseError("empty key in '" + path.string() + "'", line_no);
    if (out.count(key)) throw ParseError("duplicate key '" + key + "' in '" + path.string() + "'", line_no);
    out[key] = value;
  }
  return out;
}

/// Overrides checked against the keys a scenario declares while reading them.
class Params {
 public:
  explicit Params(std::map<std::string, std::string> overrides) : overrides_(std::move(overrides)) {}

  double real(const std::string& key, double fallback) {
    const std::string* v = lookup(key);
    const double out = v ? detail::to_real(*v, key) : fallback;
    resolved_[key] = out;
    return out;
  }

  long integer(const std::string& key, long fallback) {
    const std::string* v = lookup(key);
    double d = v ? detail::to_real(*v, key) : static_cast<double>(fallback);
    if (std::floor(d) != d) throw DomainError("parameter '" + key + "' must be an integer");
    resolved_[key] = static_cast<long>(d);
    return static_cast<long>(d);
  }

  std::vector<double> grid(const std::string& key, const std::string& fallback) {
    const std::string* v = lookup(key);
    auto out = parse_grid(v ? *v : fallback, key);
    resolved_[key] = out;
    return out;
  }

  std::string text(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed) {
    const std::string* v = lookup(key);
    const std::string out = v ? *v : fallback;
    bool ok = allowed.empty();
    for (const auto& a : allowed) ok = ok || a == out;
    if (!ok) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : "|") + a;
      throw DomainError("parameter '" + key + "': '" + out + "' is not one of " + list);
    }
    resolved_[key] = out;
    return out;
  }

  /// Throws on any override that no read asked for.
  void finish(const std::string& scenario) const {
    for (const auto& [k, v] : overrides_) {
      if (!declared_.count(k)) {
        std::string list;
        for (const auto& d : declared_) list += (list.empty() ? "" : ", ") + d;
        throw DomainError("unknown parameter '" + k + "' for scenario " + scenario + " (valid: " + list + ")");
      }
    }
  }

  const nlohmann::ordered_json& resolved() const { return resolved_; }
  nlohmann::ordered_json overrides() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : overrides_) j[k] = v;
    return j;
  }

 private:
  const std::string* lookup(const std::string& key) {
    declared_.insert(key);
    const auto it = overrides_.find(key);
    return it == overrides_.end() ? nullptr : &it->second;
  }

  std::map<std::string, std::string> overrides_;
  std::set<std::string> declared_;
  nlohmann::ordered_json resolved_ = nlohmann::ordered_json::object();
};

}  // namespace normreg::simulate

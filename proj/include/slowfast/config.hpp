#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "slowfast/error.hpp"

// Run configuration files.
//
//   # comment (also after values)
//   command = simulate        top-level keys come before any section
//   [model]
//   alpha = 0.5
//   delta = 0.3
//   [grid]
//   nx = 600
//
// One `key = value` per line. Lists are comma separated. Every section and
// key must be declared in the schema; anything else is rejected with its
// line number.
namespace slowfast::config {

enum class Type { real, integer, boolean, text, choice, real_list, real_or_auto };

struct KeySpec {
  std::string name;
  Type type;
  std::string fallback;              // default, written verbatim to the manifest
  std::vector<std::string> choices;  // for Type::choice
};

struct SectionSpec {
  std::string name;  // "" for top-level keys
  std::vector<KeySpec> keys;
};

using Schema = std::vector<SectionSpec>;

struct Entry {
  std::string value;
  int line = 0;  // 0 when the value came from the schema default
};

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

[[noreturn]] inline void fail(const std::string& origin, int line, const std::string& what) {
  std::ostringstream os;
  os << origin;
  if (line > 0) os << ":" << line;
  os << ": " << what;
  throw Error(ErrorKind::configuration, os.str());
}

inline std::optional<double> parse_real(const std::string& s) {
  double x = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [ptr, ec] = std::from_chars(b, e, x);
  if (ec != std::errc() || ptr != e || !std::isfinite(x)) return std::nullopt;
  return x;
}

inline std::optional<long long> parse_integer(const std::string& s) {
  long long x = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [ptr, ec] = std::from_chars(b, e, x);
  if (ec != std::errc() || ptr != e) return std::nullopt;
  return x;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) out.push_back(trim(item));
  return out;
}

/// Parsed and schema-checked configuration. Lookups fall back to the schema
/// defaults, so every declared key always has a value.
class Config {
 public:
  Config(Schema schema, std::string origin = "<config>") : schema_(std::move(schema)), origin_(std::move(origin)) {
    for (const auto& sec : schema_)
      for (const auto& k : sec.keys) values_[sec.name][k.name] = Entry{k.fallback, 0};
  }

  static Config parse(std::istream& in, Schema schema, std::string origin = "<config>") {
    Config c(std::move(schema), std::move(origin));
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const auto hash = raw.find('#');
      const std::string text = trim(hash == std::string::npos ? std::string_view(raw) : std::string_view(raw).substr(0, hash));
      if (text.empty()) continue;
      if (text.front() == '[') {
        if (text.back() != ']') fail(c.origin_, line, "unterminated section header");
        section = trim(std::string_view(text).substr(1, text.size() - 2));
        if (!c.find_section(section)) fail(c.origin_, line, "unknown section [" + section + "]");
        continue;
      }
      const auto eq = text.find('=');
      if (eq == std::string::npos) fail(c.origin_, line, "expected 'key = value'");
      const std::string key = trim(std::string_view(text).substr(0, eq));
      const std::string value = trim(std::string_view(text).substr(eq + 1));
      const KeySpec* spec = c.find_key(section, key);
      if (!spec) {
        const std::string where = section.empty() ? "top level" : "[" + section + "]";
        fail(c.origin_, line, "unknown key '" + key + "' in " + where);
      }
      if (value.empty()) fail(c.origin_, line, "empty value for '" + key + "'");
      auto& slot = c.values_[section][key];
      if (slot.line > 0)
        fail(c.origin_, line, "duplicate key '" + key + "' (first set on line " + std::to_string(slot.line) + ")");
      c.check_value(*spec, value, line);
      slot = Entry{value, line};
    }
    return c;
  }

  static Config load(const std::string& path, Schema schema) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::configuration, "cannot open config file '" + path + "'");
    return parse(in, std::move(schema), path);
  }

  const std::string& origin() const noexcept { return origin_; }

  bool was_set(const std::string& section, const std::string& key) const { return entry(section, key).line > 0; }
  int line_of(const std::string& section, const std::string& key) const { return entry(section, key).line; }
  const std::string& text(const std::string& section, const std::string& key) const {
    return entry(section, key).value;
  }

  double real(const std::string& section, const std::string& key) const {
    const auto& e = entry(section, key);
    const auto v = parse_real(e.value);
    if (!v) fail(origin_, e.line, "'" + key + "' is not a number");
    return *v;
  }

  /// nullopt when the key holds "auto".
  std::optional<double> real_or_auto(const std::string& section, const std::string& key) const {
    if (text(section, key) == "auto") return std::nullopt;
    return real(section, key);
  }

  long long integer(const std::string& section, const std::string& key) const {
    const auto& e = entry(section, key);
    const auto v = parse_integer(e.value);
    if (!v) fail(origin_, e.line, "'" + key + "' is not an integer");
    return *v;
  }

  bool boolean(const std::string& section, const std::string& key) const { return text(section, key) == "true"; }

  std::vector<double> reals(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    const auto& e = entry(section, key);
    if (e.value == "none") return out;
    for (const auto& item : split_list(e.value)) {
      const auto v = parse_real(item);
      if (!v) fail(origin_, e.line, "'" + key + "' contains a non-numeric entry '" + item + "'");
      out.push_back(*v);
    }
    return out;
  }

  /// Raises a configuration error pointing at the line that set `key`.
  [[noreturn]] void reject(const std::string& section, const std::string& key, const std::string& why) const {
    fail(origin_, line_of(section, key), "'" + key + "' " + why);
  }

  /// Every declared key with its resolved value, in schema order. The output
  /// parses back to an identical Config.
  std::string resolved() const {
    std::ostringstream os;
    for (const auto& sec : schema_) {
      if (!sec.name.empty()) os << "\n[" << sec.name << "]\n";
      for (const auto& k : sec.keys) os << k.name << " = " << values_.at(sec.name).at(k.name).value << "\n";
    }
    return os.str();
  }

  void set(const std::string& section, const std::string& key, const std::string& value) {
    const KeySpec* spec = find_key(section, key);
    if (!spec) throw Error(ErrorKind::configuration, "unknown key '" + key + "'");
    check_value(*spec, value, 0);
    auto& slot = values_[section][key];
    slot.value = value;
    if (slot.line == 0) slot.line = -1;
  }

 private:
  const SectionSpec* find_section(const std::string& name) const {
    for (const auto& s : schema_)
      if (s.name == name) return &s;
    return nullptr;
  }

  const KeySpec* find_key(const std::string& section, const std::string& key) const {
    const SectionSpec* s = find_section(section);
    if (!s) return nullptr;
    for (const auto& k : s->keys)
      if (k.name == key) return &k;
    return nullptr;
  }

  const Entry& entry(const std::string& section, const std::string& key) const {
    const auto s = values_.find(section);
    if (s == values_.end()) throw Error(ErrorKind::internal_consistency, "undeclared section " + section);
    const auto k = s->second.find(key);
    if (k == s->second.end()) throw Error(ErrorKind::internal_consistency, "undeclared key " + key);
    return k->second;
  }

  void check_value(const KeySpec& spec, const std::string& value, int line) const {
    auto bad = [&](const std::string& what) { fail(origin_, line, "'" + spec.name + "' " + what + " (got '" + value + "')"); };
    switch (spec.type) {
      case Type::real:
        if (!parse_real(value)) bad("must be a finite number");
        break;
      case Type::real_or_auto:
        if (value != "auto" && !parse_real(value)) bad("must be a number or 'auto'");
        break;
      case Type::integer:
        if (!parse_integer(value)) bad("must be an integer");
        break;
      case Type::boolean:
        if (value != "true" && value != "false") bad("must be true or false");
        break;
      case Type::choice:
        if (std::find(spec.choices.begin(), spec.choices.end(), value) == spec.choices.end()) {
          std::string opts;
          for (const auto& c : spec.choices) opts += (opts.empty() ? "" : "|") + c;
          bad("must be one of " + opts);
        }
        break;
      case Type::real_list:
        if (value == "none") break;
        for (const auto& item : split_list(value))
          if (!parse_real(item)) bad("must be a comma-separated list of numbers");
        break;
      case Type::text:
        break;
    }
  }

  Schema schema_;
  std::string origin_;
  std::map<std::string, std::map<std::string, Entry>> values_;
};

}  // namespace slowfast::config

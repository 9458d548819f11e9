#include "leki/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace leki {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Strip a comment that is not inside quotes.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

ConfigValue parse_scalar(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  if (s.empty()) throw ConfigError(where + ": empty value");
  if (s == "true") return ConfigValue{true};
  if (s == "false") return ConfigValue{false};
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    return ConfigValue{s.substr(1, s.size() - 2)};
  {
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), i);
    if (ec == std::errc() && p == s.data() + s.size()) return ConfigValue{i};
  }
  try {
    size_t pos = 0;
    double d = std::stod(s, &pos);
    if (pos == s.size()) return ConfigValue{d};
  } catch (const std::exception&) {
  }
  return ConfigValue{s};  // bare word
}

ConfigValue parse_value(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw ConfigError(where + ": unterminated list");
    ConfigList items;
    const std::string inner = s.substr(1, s.size() - 2);
    std::string cell;
    std::stringstream ss(inner);
    while (std::getline(ss, cell, ',')) {
      if (trim(cell).empty()) continue;
      items.push_back(parse_scalar(cell, where));
    }
    return ConfigValue{std::move(items)};
  }
  return parse_scalar(s, where);
}

}  // namespace

bool ConfigValue::as_bool() const {
  if (auto* b = std::get_if<bool>(&v)) return *b;
  throw ConfigError("expected a boolean value");
}

std::int64_t ConfigValue::as_int() const {
  if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw ConfigError("expected an integer value");
}

double ConfigValue::as_real() const {
  if (auto* d = std::get_if<double>(&v)) return *d;
  if (auto* i = std::get_if<std::int64_t>(&v)) return double(*i);
  throw ConfigError("expected a numeric value");
}

const std::string& ConfigValue::as_string() const {
  if (auto* s = std::get_if<std::string>(&v)) return *s;
  throw ConfigError("expected a string value");
}

const ConfigList& ConfigValue::as_list() const {
  if (auto* l = std::get_if<ConfigList>(&v)) return *l;
  throw ConfigError("expected a list value");
}

Config Config::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_string(buf.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  std::stringstream ss(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      cfg.sections_[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    auto& sec = cfg.sections_[section];
    if (sec.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    sec.emplace(key, parse_value(s.substr(eq + 1), where));
  }
  return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) > 0;
}

const ConfigValue& Config::at(const std::string& section,
                              const std::string& key) const {
  auto it = sections_.find(section);
  if (it == sections_.end() || !it->second.count(key))
    throw ConfigError("missing config key '" + (section.empty() ? key : section + "." + key) + "'");
  return it->second.at(key);
}

bool Config::get_bool(const std::string& section, const std::string& key,
                      bool fallback) const {
  return has(section, key) ? at(section, key).as_bool() : fallback;
}

std::int64_t Config::get_int(const std::string& section, const std::string& key,
                             std::int64_t fallback) const {
  return has(section, key) ? at(section, key).as_int() : fallback;
}

double Config::get_real(const std::string& section, const std::string& key,
                        double fallback) const {
  return has(section, key) ? at(section, key).as_real() : fallback;
}

std::string Config::get_string(const std::string& section,
                               const std::string& key,
                               std::string fallback) const {
  return has(section, key) ? at(section, key).as_string() : fallback;
}

std::optional<double> Config::get_optional_real(const std::string& section,
                                                const std::string& key) const {
  if (!has(section, key)) return std::nullopt;
  return at(section, key).as_real();
}

std::vector<std::int64_t> Config::get_int_list(const std::string& section,
                                               const std::string& key) const {
  std::vector<std::int64_t> out;
  for (const auto& item : at(section, key).as_list()) out.push_back(item.as_int());
  return out;
}

std::vector<double> Config::get_real_list(const std::string& section,
                                          const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : at(section, key).as_list()) out.push_back(item.as_real());
  return out;
}

void Config::set(const std::string& section, const std::string& key,
                 ConfigValue value) {
  sections_[section][key] = std::move(value);
}

}  // namespace leki

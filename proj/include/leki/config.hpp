#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "leki/common.hpp"

namespace leki {

// One parsed value: scalar or flat list. Integers and reals are kept apart so
// seeds survive round-trips exactly.
struct ConfigValue;
using ConfigList = std::vector<ConfigValue>;

struct ConfigValue {
  std::variant<bool, std::int64_t, double, std::string, ConfigList> v;

  bool as_bool() const;
  std::int64_t as_int() const;
  double as_real() const;  // accepts integer literals
  const std::string& as_string() const;
  const ConfigList& as_list() const;
};

// Minimal structured text: "key = value" lines grouped under [section]
// headers, '#' comments, lists in brackets. Keys before any header live in
// the "" section.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;
  const ConfigValue& at(const std::string& section, const std::string& key) const;

  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key, std::int64_t fallback) const;
  double get_real(const std::string& section, const std::string& key, double fallback) const;
  std::string get_string(const std::string& section, const std::string& key, std::string fallback) const;
  std::optional<double> get_optional_real(const std::string& section, const std::string& key) const;

  std::vector<std::int64_t> get_int_list(const std::string& section, const std::string& key) const;
  std::vector<double> get_real_list(const std::string& section, const std::string& key) const;

  // Set/override one value (used for CLI overrides like --seed).
  void set(const std::string& section, const std::string& key, ConfigValue value);

  const std::map<std::string, std::map<std::string, ConfigValue>>& sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, ConfigValue>> sections_;
};

}  // namespace leki

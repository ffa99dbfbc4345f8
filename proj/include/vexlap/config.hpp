#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "vexlap/errors.hpp"

namespace vexlap {

/// Flat key-value configuration: one `key = value` per line, `#` comments.
/// Values: quoted strings, numbers, true/false, and arrays like [1, 2, 3].
/// The subset is TOML-compatible, so configs can carry a .toml suffix.
class Config {
 public:
  using Value = std::variant<bool, double, std::string, std::vector<double>>;

  static Config parse_string(const std::string& text);
  static Config parse_file(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& dflt) const;
  double get_number(const std::string& key) const;
  double get_number(const std::string& key, double dflt) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;
  std::vector<double> get_array(const std::string& key) const;
  std::vector<int> get_int_array(const std::string& key) const;

  const std::map<std::string, Value>& values() const { return values_; }

 private:
  std::map<std::string, Value> values_;
};

}  // namespace vexlap

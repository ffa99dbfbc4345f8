#include "vexlap/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vexlap {

namespace {

std::string strip(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

Config::Value parse_value(const std::string& raw, int lineno) {
  std::string v = strip(raw);
  if (v.empty()) throw ConfigError("empty value at line " + std::to_string(lineno));
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw ConfigError("unterminated string at line " + std::to_string(lineno));
    return v.substr(1, v.size() - 2);
  }
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '[') {
    if (v.back() != ']')
      throw ConfigError("unterminated array at line " + std::to_string(lineno));
    std::vector<double> arr;
    std::string inner = v.substr(1, v.size() - 2);
    std::stringstream ss(inner);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = strip(tok);
      if (tok.empty()) continue;
      try {
        arr.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ConfigError("bad array element '" + tok + "' at line " +
                          std::to_string(lineno));
      }
    }
    return arr;
  }
  // number, or a bare descriptor like affine(2,0.5,0)
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  return v;  // bare string (descriptors)
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    // cut comments outside of strings
    bool in_str = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
      if (line[k] == '"') in_str = !in_str;
      if (line[k] == '#' && !in_str) {
        line = line.substr(0, k);
        break;
      }
    }
    line = strip(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " + std::to_string(lineno));
    std::string key = strip(line.substr(0, eq));
    if (key.empty())
      throw ConfigError("empty key at line " + std::to_string(lineno));
    cfg.values_[key] = parse_value(line.substr(eq + 1), lineno);
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

std::string Config::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing key '" + key + "'");
  if (auto* s = std::get_if<std::string>(&it->second)) return *s;
  throw ConfigError("key '" + key + "' is not a string");
}

std::string Config::get_string(const std::string& key, const std::string& dflt) const {
  return has(key) ? get_string(key) : dflt;
}

double Config::get_number(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing key '" + key + "'");
  if (auto* d = std::get_if<double>(&it->second)) return *d;
  throw ConfigError("key '" + key + "' is not a number");
}

double Config::get_number(const std::string& key, double dflt) const {
  return has(key) ? get_number(key) : dflt;
}

int Config::get_int(const std::string& key) const {
  double d = get_number(key);
  int i = static_cast<int>(std::llround(d));
  if (std::abs(d - i) > 1e-9)
    throw ConfigError("key '" + key + "' is not an integer");
  return i;
}

int Config::get_int(const std::string& key, int dflt) const {
  return has(key) ? get_int(key) : dflt;
}

bool Config::get_bool(const std::string& key, bool dflt) const {
  auto it = values_.find(key);
  if (it == values_.end()) return dflt;
  if (auto* b = std::get_if<bool>(&it->second)) return *b;
  throw ConfigError("key '" + key + "' is not a boolean");
}

std::vector<double> Config::get_array(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing key '" + key + "'");
  if (auto* a = std::get_if<std::vector<double>>(&it->second)) return *a;
  if (auto* d = std::get_if<double>(&it->second)) return {*d};
  throw ConfigError("key '" + key + "' is not an array");
}

std::vector<int> Config::get_int_array(const std::string& key) const {
  std::vector<int> out;
  for (double d : get_array(key)) {
    int i = static_cast<int>(std::llround(d));
    if (std::abs(d - i) > 1e-9)
      throw ConfigError("key '" + key + "' holds non-integer entries");
    out.push_back(i);
  }
  return out;
}

}  // namespace vexlap

#include "glim/config.hpp"

#include <fstream>
#include <sstream>

#include "glim/errors.hpp"

namespace glim {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::from_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open config '" + file + "'");
  Config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(file + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ValidationError(file + ":" + std::to_string(lineno) + ": empty key");
    }
    cfg.kv_[key] = value;  // later assignments win
  }
  return cfg;
}

void Config::set(const std::string& key, const std::string& value) { kv_[key] = value; }

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string Config::get_string(const std::string& key, const std::string& dflt) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? dflt : it->second;
}

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
  throw ValidationError("config key '" + key + "': '" + value + "' is not a " + want);
}

}  // namespace

double Config::get_double(const std::string& key, double dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  try {
    std::size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used != it->second.size()) bad_value(key, it->second, "number");
    return v;
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, it->second, "number");
  }
}

int Config::get_int(const std::string& key, int dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  try {
    std::size_t used = 0;
    int v = std::stoi(it->second, &used);
    if (used != it->second.size()) bad_value(key, it->second, "integer");
    return v;
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, it->second, "integer");
  }
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(it->second, &used);
    if (used != it->second.size()) bad_value(key, it->second, "non-negative integer");
    return v;
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    bad_value(key, it->second, "non-negative integer");
  }
}

bool Config::get_bool(const std::string& key, bool dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  bad_value(key, it->second, "boolean (true/false)");
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            const std::vector<double>& dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      std::string trimmed = trim(cell);
      double v = std::stod(trimmed, &used);
      if (used != trimmed.size()) bad_value(key, it->second, "comma-separated number list");
      out.push_back(v);
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception&) {
      bad_value(key, it->second, "comma-separated number list");
    }
  }
  if (out.empty()) bad_value(key, it->second, "comma-separated number list");
  return out;
}

}  // namespace glim

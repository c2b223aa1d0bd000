#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace glim {

// Flat "key = value" configuration. '#' starts a comment, blank lines are
// skipped, keys are dotted names, later assignments win. CLI overrides call
// set() on top of the parsed file.
class Config {
 public:
  Config() = default;
  static Config from_file(const std::string& file);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key, double dflt) const;
  int get_int(const std::string& key, int dflt) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;
  // Comma-separated doubles, e.g. "c_t = -0.7,-1.5,2".
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& dflt) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace glim

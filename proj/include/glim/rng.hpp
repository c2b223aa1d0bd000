#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace glim {

// Stream seed for one logical unit of work. Depends only on (master seed,
// stage label, unit index), never on which thread picks the unit up, so runs
// are reproducible at any --threads setting.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage, std::uint64_t index);

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}
  RngStream(std::uint64_t master, std::string_view stage, std::uint64_t index)
      : engine_(derive_seed(master, stage, index)) {}

  // U[0,1)
  double uniform() { return unif_(engine_); }
  // N(0,1)
  double gauss() { return norm_(engine_); }
  std::uint64_t next_u64() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

}  // namespace glim

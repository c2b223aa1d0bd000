#include "glim/rng.hpp"

namespace glim {

namespace {

// splitmix64 finalizer; decorrelates consecutive inputs.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view stage, std::uint64_t index) {
  // Two mixing rounds so (master, stage, index) triples that differ in any
  // single component land far apart.
  return mix64(mix64(master ^ fnv1a(stage)) + index);
}

}  // namespace glim

#pragma once

#include <cstdint>
#include <string_view>

#include "swcrt/dist.hpp"

namespace swcrt {

// splitmix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Counter-based stream: draw k is mix64(origin + k * gamma). Each (seed, label,
// index) triple owns its own origin, so replications can run in any order, or
// concurrently, and still produce identical draws.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view label, std::uint64_t index) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the label
    for (const char ch : label) h = (h ^ static_cast<unsigned char>(ch)) * 0x100000001b3ULL;
    counter_ = mix64(mix64(seed + kGamma) ^ h);
    counter_ = mix64(counter_ ^ (index * kGamma + 1));
  }

  std::uint64_t next_u64() {
    counter_ += kGamma;
    return mix64(counter_);
  }

  // Uniform strictly inside (0,1).
  double next_uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53; }

  // Standard normal by inverse-CDF transform.
  double next_normal() { return normal_quantile(next_uniform()); }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  std::uint64_t counter_ = 0;
};

}  // namespace swcrt

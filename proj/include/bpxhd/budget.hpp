#pragma once

#include <cstdint>
#include <cstdlib>
#include <limits>
#include <string>

namespace bpxhd {

/// Default cap on mesh vertices.
inline constexpr std::int64_t kDefaultDofBudget = 2'000'000;

/// Vertex budget: BPXHD_BUDGET if set to a positive integer, else the default.
inline std::int64_t default_budget() {
  if (const char* env = std::getenv("BPXHD_BUDGET")) {
    try {
      const long long v = std::stoll(env);
      if (v > 0) return static_cast<std::int64_t>(v);
    } catch (...) {
    }
  }
  return kDefaultDofBudget;
}

/// base^exp, saturating at int64 max.
inline std::int64_t saturating_pow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && r > std::numeric_limits<std::int64_t>::max() / base) return std::numeric_limits<std::int64_t>::max();
    r *= base;
  }
  return r;
}

}  // namespace bpxhd

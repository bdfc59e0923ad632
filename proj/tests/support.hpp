#pragma once

#include <optional>
#include <random>

#include "bvm/error.hpp"

namespace bvm::test {

/// Kind of the bvm::Error thrown by f, or nullopt when f returns normally.
template <class F>
std::optional<ErrorKind> error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline int uniform(std::mt19937_64& g, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(g);
}

}  // namespace bvm::test

#pragma once

// Finite index sets {0..m-1} and their subsets, encoded as bitmasks.

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bvm {

using Subset = std::uint32_t;

inline constexpr int kMaxIndexSize = 16;

inline constexpr Subset full_subset(int size) {
  return size >= 32 ? ~Subset{0} : (Subset{1} << size) - 1;
}

inline constexpr bool is_subset(Subset small, Subset big) { return (small & ~big) == 0; }

inline int subset_size(Subset s) { return std::popcount(s); }

inline bool subset_contains(Subset s, int i) { return ((s >> i) & 1U) != 0; }

std::vector<int> subset_members(Subset s);

/// "0,1" for {0,1}; "" for the empty set.
std::string subset_key(Subset s);

/// Inverse of subset_key. Returns false on malformed text or indices >= size.
bool parse_subset_key(std::string_view text, int size, Subset& out);

/// Subsets of `s`, in increasing numeric order (so every subset precedes its
/// supersets).
std::vector<Subset> subsets_of(Subset s);

}  // namespace bvm

#pragma once

// Brute-force reference implementations used only by tests and the
// acceptance binary. Nothing here prunes or caches.

#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "bvm/boolean_algebra.hpp"
#include "bvm/logic.hpp"
#include "bvm/model_finder.hpp"
#include "bvm/structure.hpp"

namespace bvm::oracle {

/// Visits every interpretation of `signature` on a domain of `size` elements,
/// with `params` parameter values, in the finder's lexicographic order
/// (constants, parameters, function entries, relation entries; last position
/// fastest). Stops when the visitor returns true.
void for_each_interpretation(const Signature& signature, int params, int size,
                             const std::function<bool(const Structure&, std::span<const int>)>& visit);

struct Model {
  Structure structure;
  std::vector<int> params;
};

/// First model of the task over domain sizes 1..bound, by exhaustive search.
std::optional<Model> brute_force_find(const FinderTask& task);

/// Size of the largest antichain of P(atoms), by trying every family of
/// nonzero elements. Requires atoms <= 4.
int max_antichain_size(int atoms);

/// Families of subsets of {0..n-1} closed downward, by testing every family.
/// Requires n <= 4.
std::vector<std::set<Subset>> downward_closed_families(int n);

/// Whether the sets indexed by t have a common member.
bool common_member(std::span<const std::set<int>> sets, Subset t);

}  // namespace bvm::oracle

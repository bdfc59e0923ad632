#pragma once

// Bounded-domain model finder.
//
// A candidate interpretation is the vector (constants, parameters, function
// entries, relation entries), each group in signature order and entries in
// tuple order. Domain sizes are tried from 1 up to the bound, and within a
// size the lexicographically least satisfying vector is returned. Symmetry
// pruning only discards vectors that a domain permutation makes
// lexicographically smaller, so the least model is never pruned.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bvm/logic.hpp"
#include "bvm/structure.hpp"

namespace bvm {

/// Node budget for one search. Reads BVM_NODE_BUDGET once; 2'000'000 by default.
std::uint64_t default_node_budget();

struct FinderTask {
  Signature signature;
  Theory axioms;
  /// Sentences that must hold; they may mention parameters #0..#params-1.
  std::vector<Formula> positive;
  /// Sentences that must fail.
  std::vector<Formula> negative;
  int params = 0;
  int bound = 1;
  std::uint64_t node_budget = default_node_budget();
};

enum class FinderStatus { kFound, kNone, kUnknown };

struct FinderResult {
  FinderStatus status = FinderStatus::kNone;
  std::optional<Structure> model;
  /// Values of #0..#params-1 in the model.
  std::vector<int> params;
  std::uint64_t nodes = 0;
};

FinderResult find_model(const FinderTask& task);

/// Checks a candidate against every constraint of the task.
bool satisfies_task(const FinderTask& task, const Structure& model, std::span<const int> params);

}  // namespace bvm

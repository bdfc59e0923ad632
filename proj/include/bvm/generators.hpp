#pragma once

// Seeded random instances for property tests and the suite runner. Draws use
// raw std::mt19937_64 output reduced modulo the range, so a seed produces the
// same instance on every platform.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bvm/boolean_algebra.hpp"
#include "bvm/bvalued.hpp"
#include "bvm/distributions.hpp"
#include "bvm/logic.hpp"
#include "bvm/structure.hpp"

namespace bvm {

using Rng = std::mt19937_64;

/// Uniform-enough draw from [0, n); n >= 1.
inline int draw(Rng& g, int n) { return static_cast<int>(g() % static_cast<std::uint64_t>(n)); }
inline bool coin(Rng& g) { return (g() & 1U) != 0; }

/// Random formula of nesting depth <= depth. Variables are named from u..z so
/// the printed form reparses without a signature; parameters are #0..#params-1.
Formula random_formula(Rng& g, const Signature& signature, int depth, int params,
                       std::span<const std::string> free_variables = {});

Structure random_structure(Rng& g, const Signature& signature, int size);

/// Random element of the algebra, nonzero when `nonzero` is set.
Element random_element(Rng& g, const BoolAlg& algebra, bool nonzero = false);

/// Bundle with fibers of 1..max_fiber elements and at most max_elements
/// element tuples (at least the largest fiber size), every coordinate
/// projection onto.
BValuedStructure random_bundle(Rng& g, const BoolAlg& algebra, const Signature& signature, int max_fiber,
                               int max_elements);

/// Random distribution over {0..index_size-1} whose values all lie above
/// `floor` (nonzero): each A(s) is the meet of the A(s \ {i}) with a random
/// element joined to the floor.
Distribution random_distribution(Rng& g, const BoolAlg& algebra, int index_size, const Element& floor);

}  // namespace bvm

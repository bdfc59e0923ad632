#pragma once

// Index-parallel loops over independent tasks. Each task writes only its own
// output slot, so results are identical in serial and parallel mode; the
// serial mode is the reference the tests compare against.

#include <cstddef>
#include <exception>
#include <vector>

namespace bvm {

enum class Execution { kSerial, kParallel };

template <class Body>
void for_each_index(std::size_t count, Execution mode, Body&& body) {
  if (mode == Execution::kSerial || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  // Exceptions cannot leave an OpenMP region; keep the one with the least
  // index so the rethrown error does not depend on scheduling.
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Least index whose predicate holds, or `count` when none does.
template <class Pred>
std::size_t find_first_index(std::size_t count, Execution mode, Pred&& pred) {
  if (mode == Execution::kSerial || count < 2) {
    for (std::size_t i = 0; i < count; ++i) {
      if (pred(i)) return i;
    }
    return count;
  }
  std::vector<char> hit(count, 0);
  for_each_index(count, mode, [&](std::size_t i) { hit[i] = pred(i) ? 1 : 0; });
  for (std::size_t i = 0; i < count; ++i) {
    if (hit[i]) return i;
  }
  return count;
}

}  // namespace bvm

#pragma once

// The verification suites behind `bvm suite run`. Each criterion generates its
// instances from the seed as JSON, then checks them independently; a failing
// instance is reported with its JSON input, which `check_instance` replays.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bvm/json_io.hpp"
#include "bvm/model_finder.hpp"
#include "bvm/parallel.hpp"

namespace bvm::suite {

enum class Status { kPass, kFail, kUnknown };
std::string_view status_name(Status s);

struct Config {
  std::uint64_t seed = 1;
  /// Upper bound on the atom count of the small-algebra criteria (1..3).
  int atoms = 3;
  int rank = 2;
  int bound = 3;
  std::uint64_t budget = default_node_budget();
  /// Criterion ids to run; empty means all.
  std::vector<int> only;
  /// "" or "flip-complement": drops the first negation on the recursive side
  /// of the evaluation-agreement check.
  std::string mutant;
  Execution execution = Execution::kParallel;
};

/// Throws FormatError when a cap leaves its module's range.
void validate(const Config& config);
io::Json to_json(const Config& config);
Config config_from_json(const io::Json& j, const std::string& at = "");

struct Outcome {
  Status status = Status::kPass;
  std::size_t checks = 0;
  std::string detail;
};

struct Counterexample {
  int criterion = 0;
  std::size_t instance = 0;
  io::Json input;
  std::string detail;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  Status status = Status::kPass;
  std::size_t instances = 0;
  std::size_t checks = 0;
  std::size_t unknown = 0;
  std::optional<Counterexample> counterexample;
  double seconds = 0;
};

struct Report {
  Config config;
  std::vector<CriterionResult> criteria;
  Status status() const;
};

struct CriterionInfo {
  int id;
  std::string_view name;
  std::string_view title;
};
std::span<const CriterionInfo> criteria();

std::vector<io::Json> instances(int id, const Config& config);
Outcome check_instance(int id, const io::Json& input, const Config& config);
CriterionResult run_criterion(int id, const Config& config);
/// Criteria in id order.
Report run(const Config& config);

/// Deterministic unless `timing` adds the wall-clock seconds.
io::Json to_json(const Report& report, bool timing = false);
std::string summary(const Report& report);

/// Replays a counterexample object; the check should fail again.
Outcome replay(const io::Json& counterexample, const Config& config);

int exit_code(Status status);

/// The formula the recursive engine sees under `mutant`: unchanged for "",
/// first negation in preorder dropped for "flip-complement". Other names
/// throw FormatError.
Formula mutated_formula(const std::string& mutant, const Formula& formula);

}  // namespace bvm::suite

// Acceptance gate: one PASS/FAIL line per criterion. Each line combines the
// suite's own verdict with independent oracle cross-checks where the
// criterion asks for one, and the three-minute runtime limit.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bvm/distributions.hpp"
#include "bvm/json_io.hpp"
#include "bvm/suite.hpp"
#include "oracles/oracles.hpp"

namespace {

using namespace bvm;
using suite::Status;

constexpr double kTimeLimitSeconds = 180.0;

struct Extra {
  bool ok = true;
  std::string note;
};

// Every downward-closed family over |s| <= 4 against the brute-force
// intersection oracle.
Extra witness_sets_against_oracle() {
  Extra x;
  std::size_t families = 0;
  std::size_t at_four = 0;
  for (int n = 0; n <= 4; ++n) {
    for (const auto& family : oracle::downward_closed_families(n)) {
      ++families;
      if (n == 4) ++at_four;
      const std::vector<Subset> members(family.begin(), family.end());
      const auto raw = goodness_witness_sets(n, members);
      std::vector<std::set<int>> sets;
      for (const auto& r : raw) sets.emplace_back(r.begin(), r.end());
      // The empty meet ranges over the tokens, one per family member.
      if (family.contains(0) == family.empty()) x.ok = false;
      for (Subset t = 1; t <= full_subset(n); ++t) {
        if (oracle::common_member(sets, t) != family.contains(t)) x.ok = false;
      }
    }
  }
  if (at_four != 168) x.ok = false;
  x.note = std::to_string(families) + " families, " + std::to_string(at_four) + " at |s|=4, oracle agrees";
  return x;
}

// For a fixed (sequence, theory), the set of patterns {t : model ⊨ ∃x̄ ⋀φ_t}
// over all models up to `bound` with all parameter choices.
std::set<std::set<Subset>> realizable_patterns(const FormulaSequence& seq, const Theory& theory, int bound) {
  std::set<std::set<Subset>> patterns;
  const int params = seq.param_count();
  std::vector<Formula> conj;
  for (Subset t = 0; t <= full_subset(seq.index_size()); ++t) conj.push_back(existential_conjunction(seq, t));
  for (int size = 1; size <= bound; ++size) {
    oracle::for_each_interpretation(seq.signature, params, size, [&](const Structure& m, std::span<const int> p) {
      Assignment asg;
      asg.params.assign(p.begin(), p.end());
      for (const Formula& axiom : theory) {
        if (!eval_ordinary(m, axiom, asg)) return false;
      }
      std::set<Subset> pattern;
      for (Subset t = 0; t < conj.size(); ++t) {
        if (eval_ordinary(m, conj[t], asg)) pattern.insert(t);
      }
      patterns.insert(std::move(pattern));
      return false;
    });
  }
  return patterns;
}

// Per atom c, some realizable pattern agrees with {t : c <= A(t)} on every t
// the criterion constrains.
bool brute_force_criterion(const Distribution& a, const std::set<std::set<Subset>>& patterns, bool possibility) {
  const int atoms = a.algebra.atom_count();
  for (int c = 0; c < atoms; ++c) {
    Subset delta = 0;
    for (int i = 0; i < a.index_size; ++i) {
      if (!possibility || a[Subset{1} << i].contains_atom(c)) delta |= Subset{1} << i;
    }
    bool found = false;
    for (const auto& pattern : patterns) {
      bool match = true;
      for (Subset t = 0; t < a.values.size() && match; ++t) {
        if ((t & ~delta) != 0) continue;
        match = pattern.contains(t) == a[t].contains_atom(c);
      }
      if (match) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

Extra criteria_against_oracle(const suite::Config& config) {
  Extra x;
  std::map<std::string, std::set<std::set<Subset>>> cache;
  std::size_t instances = 0;
  std::size_t true_verdicts = 0;
  for (const io::Json& in : suite::instances(10, config)) {
    const Distribution a = io::distribution_from_json(in.at("distribution"));
    const FormulaSequence seq = io::sequence_from_json(in.at("sequence"));
    const Theory theory = io::theory_from_json(in.at("theory"), &seq.signature);
    const std::string key = io::dump(in.at("sequence")) + io::dump(in.at("theory"));
    if (!cache.contains(key)) cache.emplace(key, realizable_patterns(seq, theory, config.bound));
    const auto& patterns = cache.at(key);
    CriterionOptions opts;
    opts.theory = theory;
    opts.bound = config.bound;
    opts.budget = config.budget;
    for (const bool possibility : {false, true}) {
      const Truth verdict = possibility ? possibility_criterion(a, seq, opts).verdict : los_map_criterion(a, seq, opts).verdict;
      const bool expected = brute_force_criterion(a, patterns, possibility);
      if (verdict == Truth::kUnknown || (verdict == Truth::kTrue) != expected) x.ok = false;
      true_verdicts += expected ? 1 : 0;
    }
    ++instances;
  }
  x.note = std::to_string(instances) + " instances match exhaustive model search (" + std::to_string(true_verdicts) + "/" +
           std::to_string(2 * instances) + " true)";
  return x;
}

Extra full_run_deterministic(const suite::Config& config) {
  Extra x;
  suite::Config run_config = config;
  run_config.only.clear();
  const std::string first = io::dump(suite::to_json(suite::run(run_config)));
  const std::string second = io::dump(suite::to_json(suite::run(run_config)));
  x.ok = first == second;
  x.note = std::string("full report ") + (x.ok ? "byte-identical" : "differs") + " across two runs (" +
           std::to_string(first.size()) + " bytes)";
  return x;
}

// The mutant must be caught and its counterexample must replay.
Extra mutant_detected(const suite::Config& config) {
  Extra x;
  suite::Config mutated = config;
  mutated.mutant = "flip-complement";
  const auto r = suite::run_criterion(1, mutated);
  x.ok = r.status == Status::kFail && r.counterexample &&
         suite::check_instance(1, r.counterexample->input, mutated).status == Status::kFail;
  x.note = std::string("flip-complement mutant ") + (x.ok ? "caught and replayed" : "NOT caught");
  return x;
}

}  // namespace

int main() {
  const suite::Config config;
  const std::map<int, std::function<Extra()>> extras{
      {1, [&] { return mutant_detected(config); }},
      {7, witness_sets_against_oracle},
      {10, [&] { return criteria_against_oracle(config); }},
      {12, [&] { return full_run_deterministic(config); }},
  };
  int failures = 0;
  for (const auto& info : suite::criteria()) {
    const auto start = std::chrono::steady_clock::now();
    const suite::CriterionResult r = suite::run_criterion(info.id, config);
    Extra extra;
    if (const auto it = extras.find(info.id); it != extras.end()) extra = it->second();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = r.status == Status::kPass && extra.ok && seconds < kTimeLimitSeconds;
    failures += ok ? 0 : 1;
    std::string line = "criterion " + std::to_string(info.id) + ": " + (ok ? "PASS" : "FAIL") + " " + std::string(info.name) +
                       " (" + std::string(suite::status_name(r.status)) + ", " + std::to_string(r.instances) +
                       " instances, " + std::to_string(r.checks) + " checks";
    if (r.unknown > 0) line += ", " + std::to_string(r.unknown) + " undecided";
    char time[32];
    std::snprintf(time, sizeof time, ", %.2fs)", seconds);
    line += time;
    if (!extra.note.empty()) line += "; " + extra.note;
    if (r.counterexample) line += "; counterexample #" + std::to_string(r.counterexample->instance) + ": " + r.counterexample->detail;
    std::printf("%s\n", line.c_str());
  }
  std::printf("acceptance: %d/%zu criteria pass\n", static_cast<int>(suite::criteria().size()) - failures,
              suite::criteria().size());
  return failures == 0 ? 0 : 1;
}

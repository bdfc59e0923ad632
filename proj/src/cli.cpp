#include "bvm/cli.hpp"

#include <cstdlib>
#include <functional>
#include <optional>

#include "CLI11.hpp"
#include "bvm/bvalued.hpp"
#include "bvm/distributions.hpp"
#include "bvm/error.hpp"
#include "bvm/json_io.hpp"
#include "bvm/model_finder.hpp"
#include "bvm/suite.hpp"
#include "bvm/transfer.hpp"
#include "bvm/ultrapower.hpp"

namespace bvm::cli {

namespace {

using io::Json;

std::string finder_status_name(FinderStatus s) {
  switch (s) {
    case FinderStatus::kFound: return "found";
    case FinderStatus::kNone: return "none";
    case FinderStatus::kUnknown: return "unknown";
  }
  return "?";
}

int finder_exit(FinderStatus s) {
  return s == FinderStatus::kFound ? kExitPass : s == FinderStatus::kNone ? kExitFail : kExitUnknown;
}

int truth_exit(Truth t) { return t == Truth::kTrue ? kExitPass : t == Truth::kFalse ? kExitFail : kExitUnknown; }

Json per_atom_json(const std::vector<FinderStatus>& statuses) {
  Json out = Json::array();
  for (FinderStatus s : statuses) out.push_back(finder_status_name(s));
  return out;
}

Json witness_json(const FormulaWitness& w) {
  return Json{{"formula", to_string(w.formula)}, {"params", w.params}, {"expected", io::to_json(w.expected)},
              {"actual", io::to_json(w.actual)}};
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

template <class T>
T env_number(const char* name, T fallback) {
  const auto v = env(name);
  if (!v) return fallback;
  try {
    return static_cast<T>(std::stoull(*v));
  } catch (const std::exception&) {
    throw FormatError("", std::string(name) + " is not a number");
  }
}

Theory theory_field(const Json& j, const Signature& sig) {
  return j.contains("theory") ? io::theory_from_json(j.at("theory"), &sig, "/theory") : Theory{};
}

// Shared finder knobs.
struct SearchFlags {
  int bound = 3;
  std::uint64_t budget = default_node_budget();
  int rank = 2;
};

CriterionOptions criterion_options(const SearchFlags& f, Theory theory) {
  CriterionOptions o;
  o.theory = std::move(theory);
  o.bound = f.bound;
  o.budget = f.budget;
  return o;
}

Json criterion_json(const CriterionReport& r) {
  Json j{{"verdict", truth_name(r.verdict)}, {"per_atom", per_atom_json(r.per_atom)}};
  if (r.structure) {
    j["structure"] = io::to_json(*r.structure);
    j["params"] = r.params;
  }
  if (r.los_map) j["los_map"] = io::to_json(*r.los_map);
  return j;
}

class Dispatcher {
 public:
  Dispatcher(std::ostream& out, std::ostream& err) : out_(out), err_(err) {
    search_.budget = env_number<std::uint64_t>("BVM_BUDGET", default_node_budget());
    search_.rank = env_number<int>("BVM_RANK", 2);
    suite_.seed = env_number<std::uint64_t>("BVM_SEED", 1);
    suite_.atoms = env_number<int>("BVM_ATOMS", 3);
    suite_.rank = search_.rank;
    suite_.budget = search_.budget;
  }

  int run(const std::vector<std::string>& args) {
    CLI::App app{"Boolean-valued model toolkit"};
    app.name("bvm");
    app.require_subcommand(1);
    build(app);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out_ << app.help();
      return kExitPass;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app.help("", CLI::AppFormatMode::All);
      return kExitPass;
    } catch (const CLI::ParseError& e) {
      err_ << "usage: " << e.what() << "\n";
      return kExitUsage;
    }
    try {
      return action_();
    } catch (const FormatError& e) {
      err_ << "format error at \"" << e.pointer() << "\": " << e.what() << "\n";
      return kExitUsage;
    } catch (const ParseError& e) {
      err_ << "parse error at offset " << e.offset() << ": " << e.what() << "\n";
      return kExitUsage;
    } catch (const Error& e) {
      err_ << error_kind_name(e.kind()) << ": " << e.what() << "\n";
      return kExitUsage;
    }
  }

 private:
  void emit(const Json& j) { out_ << io::dump(j); }

  void on(CLI::App* sub, std::function<int()> action) {
    sub->callback([this, action = std::move(action)] { action_ = action; });
  }

  void search_flags(CLI::App* sub, bool rank) {
    sub->add_option("--bound", search_.bound, "finder domain bound")->check(CLI::Range(1, 8));
    sub->add_option("--budget", search_.budget, "finder node budget");
    if (rank) sub->add_option("--rank", search_.rank, "quantifier rank")->check(CLI::Range(0, 3));
  }

  void build(CLI::App& app) {
    build_parse(app);
    build_find_model(app);
    build_eval(app);
    build_specialize(app);
    build_compactness(app);
    build_ultrapower(app);
    build_dist(app);
    build_transfer(app);
    build_suite(app);
  }

  void build_parse(CLI::App& app) {
    auto* sub = app.add_subcommand("parse", "parse a formula and print its tree");
    sub->add_option("formula", text_, "formula text")->required();
    sub->add_option("--signature", path_a_, "signature JSON file");
    on(sub, [this] {
      std::optional<Signature> sig;
      if (!path_a_.empty()) sig = io::signature_from_json(io::load_file(path_a_));
      const Formula f = parse_formula(text_, sig ? &*sig : nullptr);
      const auto fv = free_vars(f);
      emit(Json{{"formula", to_string(f)}, {"ast", io::formula_ast(f)},
                {"free_variables", std::vector<std::string>(fv.begin(), fv.end())}, {"max_parameter", max_parameter(f)}});
      return kExitPass;
    });
  }

  void build_find_model(CLI::App& app) {
    auto* sub = app.add_subcommand("find-model", "bounded model search for a task file");
    sub->add_option("task", path_a_, "task JSON")->required();
    on(sub, [this] {
      const FinderTask task = io::task_from_json(io::load_file(path_a_));
      const FinderResult r = find_model(task);
      Json j{{"status", finder_status_name(r.status)}, {"nodes", r.nodes}};
      if (r.model) {
        j["model"] = io::to_json(*r.model);
        j["params"] = r.params;
      }
      emit(j);
      return finder_exit(r.status);
    });
  }

  void build_eval(CLI::App& app) {
    auto* sub = app.add_subcommand("eval", "Boolean value of a formula under both engines");
    sub->add_option("structure", path_a_, "B-valued structure JSON")->required();
    sub->add_option("formula", text_, "formula text")->required();
    sub->add_option("--param", params_, "element for #0, #1, ... in order");
    sub->add_option("--var", vars_, "name=element binding for a free variable");
    sub->add_option("--algebra", path_b_, "algebra JSON the structure must live over");
    sub->add_option("--mutant", suite_.mutant, "inject a mutant (flip-complement)");
    on(sub, [this] {
      const BValuedStructure m = io::bvstructure_from_json(io::load_file(path_a_));
      if (!path_b_.empty()) {
        const BoolAlg alg = io::algebra_from_json(io::load_file(path_b_));
        if (!(alg == m.algebra())) throw Error(ErrorKind::kMixedAlgebras, "structure lives over a different algebra");
      }
      const Formula f = parse_formula(text_, &m.signature());
      Assignment asg;
      asg.params = params_;
      for (const auto& v : vars_) {
        const auto eq = v.find('=');
        if (eq == std::string::npos) throw FormatError("", "--var expects name=element");
        asg.variables.emplace_back(v.substr(0, eq), std::stoi(v.substr(eq + 1)));
      }
      // The mutant runs the recursive engine on the formula with its first
      // negation dropped, exactly as the evaluation suite does.
      const Formula recursive_side = suite::mutated_formula(suite_.mutant, f);
      const Element r = eval_bv(m, recursive_side, asg, Engine::kRecursive);
      const Element w = eval_bv(m, f, asg, Engine::kCoordinatewise);
      emit(Json{{"recursive", io::to_json(r)}, {"coordinatewise", io::to_json(w)}, {"agree", r == w}});
      return r == w ? kExitPass : kExitFail;
    });
  }

  void build_specialize(CLI::App& app) {
    auto* sub = app.add_subcommand("specialize", "specialization at the ultrafilter of an atom");
    sub->add_option("structure", path_a_, "B-valued structure JSON")->required();
    sub->add_option("--atom", atom_, "atom generating the ultrafilter")->required();
    sub->add_flag("--quotient", flag_, "always use the quotient construction");
    on(sub, [this] {
      const BValuedStructure m = io::bvstructure_from_json(io::load_file(path_a_));
      if (atom_ < 0 || atom_ >= m.algebra().atom_count()) throw FormatError("", "--atom outside the algebra");
      const auto u = PrincipalFilter::ultrafilter(m.algebra(), atom_);
      const Specialization s = flag_ ? specialize_by_quotient(m, u) : specialize(m, u);
      emit(Json{{"structure", io::to_json(s.structure)}, {"projection", s.projection}});
      return kExitPass;
    });
  }

  void build_compactness(CLI::App& app) {
    auto* sub = app.add_subcommand("compactness", "per-atom compactness check and synthesis");
    sub->add_option("constraint", path_a_, "value constraint JSON, optional \"theory\" field")->required();
    search_flags(sub, false);
    on(sub, [this] {
      const Json j = io::load_file(path_a_);
      const ValueConstraint vc = io::constraint_from_json(j);
      const auto r = compactness_check_and_synthesize(vc, theory_field(j, vc.signature), search_.bound, search_.budget);
      Json res{{"status", finder_status_name(r.status)}, {"per_atom", per_atom_json(r.per_atom)}};
      if (r.structure) {
        res["structure"] = io::to_json(*r.structure);
        res["embedding"] = r.embedding;
      }
      emit(res);
      return finder_exit(r.status);
    });
  }

  void build_ultrapower(CLI::App& app) {
    auto* up = app.add_subcommand("ultrapower", "Boolean ultrapowers over P(n)");
    up->require_subcommand(1);
    auto* build = up->add_subcommand("build", "M^B as a bundle");
    build->add_option("base", path_a_, "structure JSON")->required();
    build->add_option("--atoms", atom_, "atoms of B")->required()->check(CLI::Range(1, 12));
    on(build, [this] {
      const auto u = boolean_ultrapower(io::structure_from_json(io::load_file(path_a_)), BoolAlg(atom_));
      emit(Json{{"structure", io::to_json(u.structure)}, {"pre_los", pre_los(u)}});
      return kExitPass;
    });
    auto* check = up->add_subcommand("check", "fullness, pre-Łoś elementarity and Łoś at every atom");
    check->add_option("base", path_a_, "structure JSON")->required();
    check->add_option("--atoms", atom_, "atoms of B")->required()->check(CLI::Range(1, 12));
    search_flags(check, true);
    on(check, [this] {
      const Structure base = io::structure_from_json(io::load_file(path_a_));
      const BoolAlg alg(atom_);
      const auto u = boolean_ultrapower(base, alg);
      CheckOptions opts;
      opts.max_rank = search_.rank;
      const auto full = fullness_check(u.structure, search_.rank, opts);
      ElementMap map;
      const auto embed = pre_los(u);
      for (int a = 0; a < base.size(); ++a) map.emplace_back(a, embed[static_cast<std::size_t>(a)]);
      opts.params = 2;
      const auto elem = check_elementary(map, diagonal(base, alg), u.structure, search_.rank, opts);
      bool ok = full.full && elem.elementary;
      Json los = Json::array();
      for (int e = 0; e < alg.atom_count(); ++e) {
        const auto r = los_check(base, alg, PrincipalFilter::ultrafilter(alg, e), search_.rank, opts);
        ok = ok && r.elementary && r.isomorphism_ok;
        Json lj{{"atom", e}, {"elementary", r.elementary}, {"isomorphism", r.isomorphism}, {"isomorphism_ok", r.isomorphism_ok}};
        if (r.counterexample) lj["counterexample"] = witness_json(*r.counterexample);
        los.push_back(lj);
      }
      Json fj{{"full", full.full}, {"formulas_checked", full.formulas_checked}};
      if (full.counterexample) fj["counterexample"] = witness_json(*full.counterexample);
      Json ej{{"elementary", elem.elementary}, {"formulas_checked", elem.formulas_checked}};
      if (elem.counterexample) ej["counterexample"] = witness_json(*elem.counterexample);
      emit(Json{{"rank", search_.rank}, {"fullness", fj}, {"pre_los", ej}, {"los", los}});
      return ok ? kExitPass : kExitFail;
    });
  }

  void build_dist(CLI::App& app) {
    auto* dist = app.add_subcommand("dist", "distributions, Łoś maps and goodness");
    dist->require_subcommand(1);

    auto* check = dist->add_subcommand("check", "validate a distribution file");
    check->add_option("distribution", path_a_)->required();
    on(check, [this] {
      const Distribution a = io::distribution_from_json(io::load_file(path_a_));
      emit(Json{{"distribution", true}, {"multiplicative", is_multiplicative(a)}, {"index_size", a.index_size}});
      return kExitPass;
    });

    for (const bool possibility : {false, true}) {
      auto* sub = dist->add_subcommand(possibility ? "possibility" : "los",
                                       possibility ? "possibility criterion" : "Łoś-map criterion");
      sub->add_option("distribution", path_a_)->required();
      sub->add_option("sequence", path_b_, "formula sequence JSON, optional \"theory\" field")->required();
      search_flags(sub, false);
      on(sub, [this, possibility] {
        const Distribution a = io::distribution_from_json(io::load_file(path_a_));
        const Json sj = io::load_file(path_b_);
        const FormulaSequence seq = io::sequence_from_json(sj);
        const auto opts = criterion_options(search_, theory_field(sj, seq.signature));
        const auto r = possibility ? possibility_criterion(a, seq, opts) : los_map_criterion(a, seq, opts);
        emit(criterion_json(r));
        return truth_exit(r.verdict);
      });
    }

    auto* refine = dist->add_subcommand("refine", "multiplicative refinement in a filter");
    refine->add_option("distribution", path_a_)->required();
    refine->add_option("filter", path_b_)->required();
    refine->add_flag("--non-constant", flag_, "ask for a witness other than the constant table");
    on(refine, [this] {
      const Distribution a = io::distribution_from_json(io::load_file(path_a_));
      const PrincipalFilter f = io::filter_from_json(io::load_file(path_b_));
      const auto b = find_multiplicative_refinement(a, f, flag_ ? RefinementSearch::kNonConstant : RefinementSearch::kFirst);
      emit(Json{{"found", b.has_value()}, {"refinement", b ? io::to_json(*b) : Json()}});
      return b ? kExitPass : kExitFail;
    });

    auto* good = dist->add_subcommand("good", "goodness by full enumeration");
    good->add_option("filter", path_a_)->required();
    good->add_option("--index", index_, "size of the index set")->required()->check(CLI::Range(0, 4));
    on(good, [this] {
      const auto r = is_good(io::filter_from_json(io::load_file(path_a_)), index_);
      Json j{{"good", r.good}, {"distributions", r.distributions}};
      if (r.counterexample) j["counterexample"] = io::to_json(*r.counterexample);
      emit(j);
      return r.good ? kExitPass : kExitFail;
    });

    auto* sat = dist->add_subcommand("saturates", "saturation report for an ultrafilter");
    sat->add_option("filter", path_a_)->required();
    sat->add_option("sequence", path_b_)->required();
    search_flags(sat, false);
    on(sat, [this] {
      const PrincipalFilter u = io::filter_from_json(io::load_file(path_a_));
      const Json sj = io::load_file(path_b_);
      const FormulaSequence seq = io::sequence_from_json(sj);
      const auto r = saturates(u, seq, criterion_options(search_, theory_field(sj, seq.signature)));
      Json entries = Json::array();
      for (const auto& e : r.entries) {
        Json ej{{"distribution", io::to_json(e.distribution)}, {"los_map", truth_name(e.los_map)},
                {"possibility", truth_name(e.possibility)}};
        if (e.refinement) ej["refinement"] = io::to_json(*e.refinement);
        entries.push_back(ej);
      }
      emit(Json{{"saturates", r.saturates}, {"unknown", r.unknown}, {"candidates", r.candidates}, {"entries", entries}});
      return r.unknown ? kExitUnknown : r.saturates ? kExitPass : kExitFail;
    });
  }

  void build_transfer(CLI::App& app) {
    auto* tr = app.add_subcommand("transfer", "homomorphisms and good pairs");
    tr->require_subcommand(1);

    auto* push = tr->add_subcommand("push", "pushforward j∘A0");
    push->add_option("hom", path_a_)->required();
    push->add_option("distribution", path_b_)->required();
    on(push, [this] {
      emit(io::to_json(pushforward(io::hom_from_json(io::load_file(path_a_)), io::distribution_from_json(io::load_file(path_b_)))));
      return kExitPass;
    });

    auto* pull = tr->add_subcommand("pull", "pullback of a target distribution");
    pull->add_option("hom", path_a_)->required();
    pull->add_option("distribution", path_b_)->required();
    on(pull, [this] {
      emit(io::to_json(pullback_distribution(io::hom_from_json(io::load_file(path_a_)),
                                             io::distribution_from_json(io::load_file(path_b_)))));
      return kExitPass;
    });

    auto* check = tr->add_subcommand("check", "Łoś-map criterion on both sides of j");
    check->add_option("hom", path_a_)->required();
    check->add_option("distribution", path_b_)->required();
    check->add_option("sequence", path_c_)->required();
    search_flags(check, false);
    on(check, [this] {
      const AlgebraHom j = io::hom_from_json(io::load_file(path_a_));
      const Distribution a0 = io::distribution_from_json(io::load_file(path_b_));
      const Json sj = io::load_file(path_c_);
      const FormulaSequence seq = io::sequence_from_json(sj);
      const auto r = los_transfer_check(j, a0, seq, criterion_options(search_, theory_field(sj, seq.signature)));
      Json out{{"source", truth_name(r.source)}, {"target", truth_name(r.target)}, {"decided", r.decided},
               {"agree", r.agree}, {"transfer_defect", r.transfer_defect}};
      if (r.source_counterexample) out["source_counterexample"] = io::to_json(*r.source_counterexample);
      if (r.target_counterexample) out["target_counterexample"] = io::to_json(*r.target_counterexample);
      emit(out);
      return !r.decided ? kExitUnknown : r.agree ? kExitPass : kExitFail;
    });

    auto* pair = tr->add_subcommand("goodpair", "pre-good check, extension and witness search");
    pair->add_option("state", path_a_)->required();
    pair->add_option("--witness", text_, "element JSON, e.g. [0,2]");
    on(pair, [this] {
      const GoodPairState s = io::state_from_json(io::load_file(path_a_));
      const bool pregood = is_pregood(s);
      Json out{{"pregood", pregood}};
      if (pregood) out["extended_filter"] = io::to_json(extend_to_good(s).filter.generator());
      if (!text_.empty()) {
        const Element a = io::element_from_json(io::parse_text(text_), s.source, "/witness");
        const auto w = find_witness(s, a);
        if (w) {
          Json choice = Json::array();
          for (const auto& [antichain, member] : w->choice) choice.push_back({antichain, member});
          out["witness"] = Json{{"choice", choice}, {"designated", w->designated}};
        } else {
          out["witness"] = nullptr;
        }
      }
      emit(out);
      return pregood ? kExitPass : kExitFail;
    });

    auto* step = tr->add_subcommand("step", "one refinement step");
    step->add_option("filter", path_a_)->required();
    step->add_option("antichain", path_b_)->required();
    step->add_option("distribution", path_c_)->required();
    on(step, [this] {
      const auto r = refinement_step(io::filter_from_json(io::load_file(path_a_)),
                                     io::antichain_from_json(io::load_file(path_b_)),
                                     io::distribution_from_json(io::load_file(path_c_)));
      emit(Json{{"refinement", io::to_json(r.refinement)}, {"filter", io::to_json(r.filter)}});
      return kExitPass;
    });
  }

  void build_suite(CLI::App& app) {
    auto* suite = app.add_subcommand("suite", "verification suites");
    suite->require_subcommand(1);
    auto* run = suite->add_subcommand("run", "run the acceptance suites");
    run->add_option("--seed", suite_.seed, "random seed");
    run->add_option("--atoms", suite_.atoms, "atom cap for small-algebra suites")->check(CLI::Range(1, 3));
    run->add_option("--rank", suite_.rank, "formula rank")->check(CLI::Range(0, 2));
    run->add_option("--bound", suite_.bound, "finder bound")->check(CLI::Range(1, 4));
    run->add_option("--budget", suite_.budget, "finder node budget");
    run->add_option("--only", suite_.only, "criterion ids to run");
    run->add_option("--mutant", suite_.mutant, "inject a mutant (flip-complement)");
    run->add_flag("--timing", flag_, "add wall-clock seconds (breaks byte identity)");
    run->add_flag("--serial", serial_, "run instances serially");
    run->add_option("--out", path_a_, "write the JSON report here instead of stdout");
    on(run, [this] {
      if (serial_) suite_.execution = Execution::kSerial;
      const suite::Report report = suite::run(suite_);
      const Json j = suite::to_json(report, flag_);
      if (path_a_.empty()) {
        emit(j);
      } else {
        io::store_file(path_a_, j);
      }
      err_ << suite::summary(report);
      return suite::exit_code(report.status());
    });

    auto* replay = suite->add_subcommand("replay", "re-check every counterexample of a report");
    replay->add_option("report", path_b_)->required();
    on(replay, [this] {
      const Json report = io::load_file(path_b_);
      if (!report.contains("config") || !report.contains("criteria")) throw FormatError("", "not a suite report");
      const suite::Config config = suite::config_from_json(report.at("config"), "/config");
      Json results = Json::array();
      bool refailed = false;
      for (const auto& c : report.at("criteria")) {
        if (!c.contains("counterexample")) continue;
        const suite::Outcome o = suite::replay(c.at("counterexample"), config);
        refailed = refailed || o.status == suite::Status::kFail;
        results.push_back(Json{{"criterion", c.at("id")}, {"status", suite::status_name(o.status)}, {"detail", o.detail}});
      }
      emit(Json{{"replays", results}});
      return refailed ? kExitFail : kExitPass;
    });
  }

  std::ostream& out_;
  std::ostream& err_;
  std::function<int()> action_;
  SearchFlags search_;
  suite::Config suite_;
  std::string path_a_, path_b_, path_c_, text_;
  std::vector<int> params_;
  std::vector<std::string> vars_;
  int atom_ = 0;
  int index_ = 0;
  bool flag_ = false;
  bool serial_ = false;
};

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    Dispatcher d(out, err);
    return d.run(args);
  } catch (const FormatError& e) {
    err << "format error at \"" << e.pointer() << "\": " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace bvm::cli

#include "bvm/model_finder.hpp"

#include <algorithm>
#include <cstdlib>

#include "bvm/error.hpp"

namespace bvm {

std::uint64_t default_node_budget() {
  static const std::uint64_t budget = [] {
    if (const char* env = std::getenv("BVM_NODE_BUDGET")) {
      char* end = nullptr;
      unsigned long long v = std::strtoull(env, &end, 10);
      if (end != env && *end == '\0' && v > 0) return static_cast<std::uint64_t>(v);
    }
    return std::uint64_t{2'000'000};
  }();
  return budget;
}

namespace {

using detail::CNode;
using detail::CTerm;

enum Truth : std::uint8_t { kFalse = 0, kTrue = 1, kUnknown = 2 };

struct Position {
  enum class Kind { kConstant, kParam, kFunction, kRelation } kind;
  int symbol = 0;
  std::size_t entry = 0;
  /// Largest element mentioned by the keys of this and earlier positions.
  int key_max = -1;
};

class Search {
 public:
  Search(const FinderTask& task, int size) : task_(task), sig_(task.signature), size_(size) {
    for (const auto& r : sig_.relations()) rel_.emplace_back(power(r.arity), kUnknown);
    for (const auto& f : sig_.functions()) fun_.emplace_back(power(f.arity), -1);
    const_.assign(sig_.constants().size(), -1);
    params_.assign(static_cast<std::size_t>(task.params), -1);

    for (std::size_t c = 0; c < const_.size(); ++c) {
      positions_.push_back({Position::Kind::kConstant, static_cast<int>(c), 0, -1});
    }
    for (int p = 0; p < task.params; ++p) positions_.push_back({Position::Kind::kParam, p, 0, -1});
    int key_max = -1;
    for (std::size_t f = 0; f < fun_.size(); ++f) {
      const int arity = sig_.functions()[f].arity;
      for (std::size_t e = 0; e < fun_[f].size(); ++e) {
        key_max = std::max(key_max, max_digit(e, arity));
        positions_.push_back({Position::Kind::kFunction, static_cast<int>(f), e, key_max});
      }
    }
    for (std::size_t r = 0; r < rel_.size(); ++r) {
      for (std::size_t e = 0; e < rel_[r].size(); ++e) {
        positions_.push_back({Position::Kind::kRelation, static_cast<int>(r), e, -1});
      }
    }
  }

  void add_constraint(const detail::CompiledFormula& f, bool must_hold) {
    constraints_.push_back({&f, must_hold});
  }

  /// Returns kTrue when found, kFalse when exhausted, kUnknown on budget.
  Truth run(std::uint64_t& nodes, std::uint64_t budget) {
    nodes_ = &nodes;
    budget_ = budget;
    if (violated()) return kFalse;
    return descend(0, -1);
  }

  Structure model() const {
    Structure m(sig_, size_);
    for (std::size_t c = 0; c < const_.size(); ++c) m.set_constant(static_cast<int>(c), const_[c]);
    for (std::size_t f = 0; f < fun_.size(); ++f) {
      const int arity = sig_.functions()[f].arity;
      for (std::size_t e = 0; e < fun_[f].size(); ++e) {
        m.set_value(static_cast<int>(f), digits(e, arity), fun_[f][e]);
      }
    }
    for (std::size_t r = 0; r < rel_.size(); ++r) {
      const int arity = sig_.relations()[r].arity;
      for (std::size_t e = 0; e < rel_[r].size(); ++e) {
        m.set_holds(static_cast<int>(r), digits(e, arity), rel_[r][e] == kTrue);
      }
    }
    return m;
  }

  const std::vector<int>& params() const { return params_; }

 private:
  struct Constraint {
    const detail::CompiledFormula* formula;
    bool must_hold;
  };

  std::size_t power(int arity) const {
    std::size_t out = 1;
    for (int i = 0; i < arity; ++i) out *= static_cast<std::size_t>(size_);
    return out;
  }

  int max_digit(std::size_t entry, int arity) const {
    int best = -1;
    for (int i = 0; i < arity; ++i) {
      best = std::max(best, static_cast<int>(entry % static_cast<std::size_t>(size_)));
      entry /= static_cast<std::size_t>(size_);
    }
    return best;
  }

  std::vector<int> digits(std::size_t entry, int arity) const {
    std::vector<int> out(static_cast<std::size_t>(arity), 0);
    for (int i = arity - 1; i >= 0; --i) {
      out[static_cast<std::size_t>(i)] = static_cast<int>(entry % static_cast<std::size_t>(size_));
      entry /= static_cast<std::size_t>(size_);
    }
    return out;
  }

  Truth descend(std::size_t depth, int value_max) {
    if (depth == positions_.size()) return kTrue;
    const Position& pos = positions_[depth];
    if (pos.kind == Position::Kind::kRelation) {
      auto& cell = rel_[static_cast<std::size_t>(pos.symbol)][pos.entry];
      for (Truth v : {kFalse, kTrue}) {
        if (++*nodes_ > budget_) return kUnknown;
        cell = v;
        if (!violated()) {
          const Truth r = descend(depth + 1, value_max);
          if (r != kFalse) return r;
        }
      }
      cell = kUnknown;
      return kFalse;
    }
    int& cell = pos.kind == Position::Kind::kConstant ? const_[static_cast<std::size_t>(pos.symbol)]
                : pos.kind == Position::Kind::kParam
                    ? params_[static_cast<std::size_t>(pos.symbol)]
                    : fun_[static_cast<std::size_t>(pos.symbol)][pos.entry];
    // Values above every element mentioned so far are interchangeable, so only
    // the least of them is tried.
    const int limit = std::min(size_ - 1, std::max(value_max, pos.key_max) + 1);
    for (int v = 0; v <= limit; ++v) {
      if (++*nodes_ > budget_) return kUnknown;
      cell = v;
      if (!violated()) {
        const Truth r = descend(depth + 1, std::max(value_max, v));
        if (r != kFalse) return r;
      }
    }
    cell = -1;
    return kFalse;
  }

  bool violated() {
    for (const Constraint& c : constraints_) {
      env_.assign(static_cast<std::size_t>(c.formula->slot_count), 0);
      const Truth t = eval(c.formula->root);
      if (t != kUnknown && (t == kTrue) != c.must_hold) return true;
    }
    return false;
  }

  int term(const CTerm& t) {
    switch (t.kind) {
      case CTerm::Kind::kSlot: return env_[static_cast<std::size_t>(t.index)];
      case CTerm::Kind::kParam: return params_[static_cast<std::size_t>(t.index)];
      case CTerm::Kind::kConst: return const_[static_cast<std::size_t>(t.index)];
      case CTerm::Kind::kFunc: {
        std::size_t idx = 0;
        for (const CTerm& a : t.args) {
          const int v = term(a);
          if (v < 0) return -1;
          idx = idx * static_cast<std::size_t>(size_) + static_cast<std::size_t>(v);
        }
        return fun_[static_cast<std::size_t>(t.index)][idx];
      }
    }
    return -1;
  }

  Truth eval(const CNode& n) {
    switch (n.kind) {
      case CNode::Kind::kTrue: return kTrue;
      case CNode::Kind::kFalse: return kFalse;
      case CNode::Kind::kEquals: {
        const int a = term(n.terms[0]);
        const int b = term(n.terms[1]);
        if (a < 0 || b < 0) return kUnknown;
        return a == b ? kTrue : kFalse;
      }
      case CNode::Kind::kRelation: {
        std::size_t idx = 0;
        for (const CTerm& t : n.terms) {
          const int v = term(t);
          if (v < 0) return kUnknown;
          idx = idx * static_cast<std::size_t>(size_) + static_cast<std::size_t>(v);
        }
        return static_cast<Truth>(rel_[static_cast<std::size_t>(n.index)][idx]);
      }
      case CNode::Kind::kNot: {
        const Truth t = eval(n.kids[0]);
        return t == kUnknown ? kUnknown : (t == kTrue ? kFalse : kTrue);
      }
      case CNode::Kind::kAnd: {
        const Truth a = eval(n.kids[0]);
        if (a == kFalse) return kFalse;
        const Truth b = eval(n.kids[1]);
        if (b == kFalse) return kFalse;
        return (a == kTrue && b == kTrue) ? kTrue : kUnknown;
      }
      case CNode::Kind::kOr: {
        const Truth a = eval(n.kids[0]);
        if (a == kTrue) return kTrue;
        const Truth b = eval(n.kids[1]);
        if (b == kTrue) return kTrue;
        return (a == kFalse && b == kFalse) ? kFalse : kUnknown;
      }
      case CNode::Kind::kImplies: {
        const Truth a = eval(n.kids[0]);
        if (a == kFalse) return kTrue;
        const Truth b = eval(n.kids[1]);
        if (b == kTrue) return kTrue;
        return (a == kTrue && b == kFalse) ? kFalse : kUnknown;
      }
      case CNode::Kind::kExists:
      case CNode::Kind::kForall: {
        const bool universal = n.kind == CNode::Kind::kForall;
        const Truth decisive = universal ? kFalse : kTrue;
        bool unknown = false;
        const auto slot = static_cast<std::size_t>(n.index);
        for (int a = 0; a < size_; ++a) {
          env_[slot] = a;
          const Truth t = eval(n.kids[0]);
          if (t == decisive) return decisive;
          unknown = unknown || t == kUnknown;
        }
        return unknown ? kUnknown : (universal ? kTrue : kFalse);
      }
    }
    return kUnknown;
  }

  const FinderTask& task_;
  const Signature& sig_;
  int size_;
  std::vector<std::vector<std::uint8_t>> rel_;
  std::vector<std::vector<int>> fun_;
  std::vector<int> const_;
  std::vector<int> params_;
  std::vector<Position> positions_;
  std::vector<Constraint> constraints_;
  std::vector<int> env_;
  std::uint64_t* nodes_ = nullptr;
  std::uint64_t budget_ = 0;
};

void require_closed(const Formula& f, int params) {
  if (!is_sentence(f)) {
    throw Error(ErrorKind::kUnboundVariable, "finder constraint has free variables: " + to_string(f));
  }
  if (max_parameter(f) >= params) {
    throw Error(ErrorKind::kForeignParameter, "finder constraint uses an undeclared parameter: " +
                                                  to_string(f));
  }
}

}  // namespace

bool satisfies_task(const FinderTask& task, const Structure& model, std::span<const int> params) {
  Assignment a;
  a.params.assign(params.begin(), params.end());
  for (const Formula& f : task.axioms) {
    if (!eval_ordinary(model, f, a)) return false;
  }
  for (const Formula& f : task.positive) {
    if (!eval_ordinary(model, f, a)) return false;
  }
  for (const Formula& f : task.negative) {
    if (eval_ordinary(model, f, a)) return false;
  }
  return true;
}

FinderResult find_model(const FinderTask& task) {
  if (task.bound < 1) throw Error(ErrorKind::kPreconditionFailed, "finder bound must be >= 1");
  std::vector<detail::CompiledFormula> compiled;
  std::vector<bool> must_hold;
  auto add = [&](const Formula& f, bool hold) {
    require_closed(f, task.params);
    compiled.push_back(detail::compile(f, task.signature));
    must_hold.push_back(hold);
  };
  for (const Formula& f : task.axioms) {
    if (max_parameter(f) >= 0) throw Error(ErrorKind::kForeignParameter, "axioms may not use parameters");
    add(f, true);
  }
  for (const Formula& f : task.positive) add(f, true);
  for (const Formula& f : task.negative) add(f, false);

  FinderResult result;
  for (int size = 1; size <= task.bound; ++size) {
    Search search(task, size);
    for (std::size_t i = 0; i < compiled.size(); ++i) search.add_constraint(compiled[i], must_hold[i]);
    const auto outcome = search.run(result.nodes, task.node_budget);
    if (outcome == kUnknown) {
      result.status = FinderStatus::kUnknown;
      return result;
    }
    if (outcome == kTrue) {
      Structure model = search.model();
      if (!satisfies_task(task, model, search.params())) {
        throw Error(ErrorKind::kPreconditionFailed, "finder produced a model that fails re-verification");
      }
      result.status = FinderStatus::kFound;
      result.model = std::move(model);
      result.params = search.params();
      return result;
    }
  }
  result.status = FinderStatus::kNone;
  return result;
}

}  // namespace bvm

#include "bvm/structure.hpp"

#include <algorithm>

#include "bvm/error.hpp"

namespace bvm {

namespace detail {

namespace {

class Compiler {
 public:
  Compiler(const Signature& sig, std::span<const std::string> free_order)
      : sig_(sig), free_(free_order.begin(), free_order.end()) {}

  CompiledFormula run(const Formula& f) {
    CompiledFormula out;
    out.free_count = static_cast<int>(free_.size());
    out.root = node(f);
    out.slot_count = out.free_count + max_depth_;
    out.param_count = max_param_ + 1;
    return out;
  }

 private:
  int slot_of(const std::string& name) const {
    for (std::size_t i = bound_.size(); i > 0; --i) {
      if (bound_[i - 1] == name) return static_cast<int>(free_.size() + i - 1);
    }
    for (std::size_t i = 0; i < free_.size(); ++i) {
      if (free_[i] == name) return static_cast<int>(i);
    }
    throw Error(ErrorKind::kUnboundVariable, "no value for variable '" + name + "'");
  }

  CTerm term(const Term& t) {
    CTerm out;
    switch (t.kind()) {
      case Term::Kind::kVariable:
        out.kind = CTerm::Kind::kSlot;
        out.index = slot_of(t.name());
        break;
      case Term::Kind::kParameter:
        out.kind = CTerm::Kind::kParam;
        out.index = t.parameter_index();
        max_param_ = std::max(max_param_, out.index);
        break;
      case Term::Kind::kConstant: {
        auto idx = sig_.constant_index(t.name());
        if (!idx) {
          // A constant-looking name that is bound or assigned is a variable.
          out.kind = CTerm::Kind::kSlot;
          try {
            out.index = slot_of(t.name());
          } catch (const Error&) {
            throw Error(ErrorKind::kUnknownSymbol, "unknown constant '" + t.name() + "'");
          }
          break;
        }
        out.kind = CTerm::Kind::kConst;
        out.index = *idx;
        break;
      }
      case Term::Kind::kFunction: {
        auto idx = sig_.function_index(t.name());
        if (!idx) throw Error(ErrorKind::kUnknownSymbol, "unknown function '" + t.name() + "'");
        if (sig_.functions()[static_cast<std::size_t>(*idx)].arity !=
            static_cast<int>(t.args().size())) {
          throw Error(ErrorKind::kUnknownSymbol, "wrong arity for function '" + t.name() + "'");
        }
        out.kind = CTerm::Kind::kFunc;
        out.index = *idx;
        for (const Term& a : t.args()) out.args.push_back(term(a));
        break;
      }
    }
    return out;
  }

  CNode node(const Formula& f) {
    CNode out;
    switch (f.kind()) {
      case Formula::Kind::kTrue: out.kind = CNode::Kind::kTrue; break;
      case Formula::Kind::kFalse: out.kind = CNode::Kind::kFalse; break;
      case Formula::Kind::kEquals:
        out.kind = CNode::Kind::kEquals;
        for (const Term& t : f.terms()) out.terms.push_back(term(t));
        break;
      case Formula::Kind::kRelation: {
        auto idx = sig_.relation_index(f.name());
        if (!idx) throw Error(ErrorKind::kUnknownSymbol, "unknown relation '" + f.name() + "'");
        if (sig_.relations()[static_cast<std::size_t>(*idx)].arity !=
            static_cast<int>(f.terms().size())) {
          throw Error(ErrorKind::kUnknownSymbol, "wrong arity for relation '" + f.name() + "'");
        }
        out.kind = CNode::Kind::kRelation;
        out.index = *idx;
        for (const Term& t : f.terms()) out.terms.push_back(term(t));
        break;
      }
      case Formula::Kind::kNot: out.kind = CNode::Kind::kNot; break;
      case Formula::Kind::kAnd: out.kind = CNode::Kind::kAnd; break;
      case Formula::Kind::kOr: out.kind = CNode::Kind::kOr; break;
      case Formula::Kind::kImplies: out.kind = CNode::Kind::kImplies; break;
      case Formula::Kind::kExists:
      case Formula::Kind::kForall: {
        out.kind = f.kind() == Formula::Kind::kExists ? CNode::Kind::kExists : CNode::Kind::kForall;
        bound_.push_back(f.name());
        max_depth_ = std::max(max_depth_, static_cast<int>(bound_.size()));
        out.index = static_cast<int>(free_.size() + bound_.size() - 1);
        out.kids.push_back(node(f.child(0)));
        bound_.pop_back();
        return out;
      }
    }
    for (const Formula& c : f.children()) out.kids.push_back(node(c));
    return out;
  }

  const Signature& sig_;
  std::vector<std::string> free_;
  std::vector<std::string> bound_;
  int max_depth_ = 0;
  int max_param_ = -1;
};

}  // namespace

CompiledFormula compile(const Formula& formula, const Signature& signature,
                        std::span<const std::string> free_order) {
  return Compiler(signature, free_order).run(formula);
}

}  // namespace detail

namespace {

std::size_t power(int base, int exponent) {
  std::size_t out = 1;
  for (int i = 0; i < exponent; ++i) out *= static_cast<std::size_t>(base);
  return out;
}

}  // namespace

Structure::Structure(Signature signature, int size)
    : signature_(std::move(signature)), size_(size) {
  if (size < 1) throw Error(ErrorKind::kInvalidTuple, "structures have nonempty domains");
  for (const auto& r : signature_.relations()) relations_.emplace_back(power(size, r.arity), 0);
  for (const auto& f : signature_.functions()) functions_.emplace_back(power(size, f.arity), 0);
  constants_.assign(signature_.constants().size(), 0);
}

std::size_t Structure::tuple_index(std::span<const int> args) const {
  std::size_t idx = 0;
  for (int a : args) {
    if (a < 0 || a >= size_) throw Error(ErrorKind::kInvalidTuple, "element out of domain");
    idx = idx * static_cast<std::size_t>(size_) + static_cast<std::size_t>(a);
  }
  return idx;
}

bool Structure::holds(int relation, std::span<const int> args) const {
  return relations_.at(static_cast<std::size_t>(relation))[tuple_index(args)] != 0;
}

void Structure::set_holds(int relation, std::span<const int> args, bool value) {
  relations_.at(static_cast<std::size_t>(relation))[tuple_index(args)] = value ? 1 : 0;
}

int Structure::apply(int function, std::span<const int> args) const {
  return functions_.at(static_cast<std::size_t>(function))[tuple_index(args)];
}

void Structure::set_value(int function, std::span<const int> args, int value) {
  if (value < 0 || value >= size_) throw Error(ErrorKind::kInvalidTuple, "value out of domain");
  functions_.at(static_cast<std::size_t>(function))[tuple_index(args)] = value;
}

void Structure::set_constant(int index, int value) {
  if (value < 0 || value >= size_) throw Error(ErrorKind::kInvalidTuple, "value out of domain");
  constants_.at(static_cast<std::size_t>(index)) = value;
}

namespace {

using detail::CNode;
using detail::CTerm;

int eval_term(const Structure& m, const CTerm& t, std::span<const int> env,
              std::span<const int> params) {
  switch (t.kind) {
    case CTerm::Kind::kSlot: return env[static_cast<std::size_t>(t.index)];
    case CTerm::Kind::kParam: return params[static_cast<std::size_t>(t.index)];
    case CTerm::Kind::kConst: return m.constant(t.index);
    case CTerm::Kind::kFunc: {
      int args[8];
      std::vector<int> big;
      int* buf = args;
      if (t.args.size() > 8) {
        big.resize(t.args.size());
        buf = big.data();
      }
      for (std::size_t i = 0; i < t.args.size(); ++i) buf[i] = eval_term(m, t.args[i], env, params);
      return m.apply(t.index, std::span<const int>(buf, t.args.size()));
    }
  }
  return 0;
}

bool eval_node(const Structure& m, const CNode& n, std::span<int> env, std::span<const int> params) {
  switch (n.kind) {
    case CNode::Kind::kTrue: return true;
    case CNode::Kind::kFalse: return false;
    case CNode::Kind::kEquals:
      return eval_term(m, n.terms[0], env, params) == eval_term(m, n.terms[1], env, params);
    case CNode::Kind::kRelation: {
      int args[8];
      std::vector<int> big;
      int* buf = args;
      if (n.terms.size() > 8) {
        big.resize(n.terms.size());
        buf = big.data();
      }
      for (std::size_t i = 0; i < n.terms.size(); ++i) buf[i] = eval_term(m, n.terms[i], env, params);
      return m.holds(n.index, std::span<const int>(buf, n.terms.size()));
    }
    case CNode::Kind::kNot: return !eval_node(m, n.kids[0], env, params);
    case CNode::Kind::kAnd:
      return eval_node(m, n.kids[0], env, params) && eval_node(m, n.kids[1], env, params);
    case CNode::Kind::kOr:
      return eval_node(m, n.kids[0], env, params) || eval_node(m, n.kids[1], env, params);
    case CNode::Kind::kImplies:
      return !eval_node(m, n.kids[0], env, params) || eval_node(m, n.kids[1], env, params);
    case CNode::Kind::kExists:
    case CNode::Kind::kForall: {
      // ∀ is read as ¬∃¬.
      const bool universal = n.kind == CNode::Kind::kForall;
      const auto slot = static_cast<std::size_t>(n.index);
      for (int a = 0; a < m.size(); ++a) {
        env[slot] = a;
        const bool body = eval_node(m, n.kids[0], env, params);
        if (universal ? !body : body) return !universal;
      }
      return universal;
    }
  }
  return false;
}

}  // namespace

bool eval_compiled(const Structure& structure, const detail::CompiledFormula& formula,
                   std::span<int> env, std::span<const int> params) {
  if (static_cast<int>(params.size()) < formula.param_count) {
    throw Error(ErrorKind::kUnboundVariable, "no value for parameter #" +
                                                 std::to_string(params.size()));
  }
  for (int p : params) {
    if (p < 0 || p >= structure.size()) {
      throw Error(ErrorKind::kForeignParameter, "parameter outside the domain");
    }
  }
  return eval_node(structure, formula.root, env, params);
}

bool eval_ordinary(const Structure& structure, const Formula& formula, const Assignment& assignment) {
  std::vector<std::string> names;
  std::vector<int> env;
  for (const auto& [name, value] : assignment.variables) {
    if (value < 0 || value >= structure.size()) {
      throw Error(ErrorKind::kForeignParameter, "value for '" + name + "' outside the domain");
    }
    names.push_back(name);
    env.push_back(value);
  }
  const auto compiled = detail::compile(formula, structure.signature(), names);
  env.resize(static_cast<std::size_t>(compiled.slot_count), 0);
  return eval_compiled(structure, compiled, env, assignment.params);
}

bool is_isomorphism(const Structure& a, const Structure& b, std::span<const int> map) {
  if (a.signature() != b.signature() || a.size() != b.size() ||
      static_cast<int>(map.size()) != a.size()) {
    return false;
  }
  std::vector<bool> hit(static_cast<std::size_t>(b.size()), false);
  for (int v : map) {
    if (v < 0 || v >= b.size() || hit[static_cast<std::size_t>(v)]) return false;
    hit[static_cast<std::size_t>(v)] = true;
  }
  const Signature& sig = a.signature();
  for (std::size_t c = 0; c < sig.constants().size(); ++c) {
    const int ci = static_cast<int>(c);
    if (map[static_cast<std::size_t>(a.constant(ci))] != b.constant(ci)) return false;
  }
  auto for_each_tuple = [&](int arity, auto&& f) {
    std::vector<int> t(static_cast<std::size_t>(arity), 0);
    std::vector<int> image(t.size(), 0);
    while (true) {
      for (std::size_t i = 0; i < t.size(); ++i) image[i] = map[static_cast<std::size_t>(t[i])];
      if (!f(t, image)) return false;
      std::size_t k = t.size();
      while (k > 0) {
        --k;
        if (++t[k] < a.size()) break;
        t[k] = 0;
        if (k == 0) return true;
      }
    }
  };
  for (std::size_t r = 0; r < sig.relations().size(); ++r) {
    const int ri = static_cast<int>(r);
    if (!for_each_tuple(sig.relations()[r].arity, [&](const auto& t, const auto& img) {
          return a.holds(ri, t) == b.holds(ri, img);
        })) {
      return false;
    }
  }
  for (std::size_t f = 0; f < sig.functions().size(); ++f) {
    const int fi = static_cast<int>(f);
    if (!for_each_tuple(sig.functions()[f].arity, [&](const auto& t, const auto& img) {
          return map[static_cast<std::size_t>(a.apply(fi, t))] == b.apply(fi, img);
        })) {
      return false;
    }
  }
  return true;
}

Structure linear_order(int size) {
  Structure out(Signature({{"<", 2}}, {}, {}), size);
  for (int i = 0; i < size; ++i) {
    for (int j = i + 1; j < size; ++j) {
      const int args[] = {i, j};
      out.set_holds(0, args, true);
    }
  }
  return out;
}

}  // namespace bvm

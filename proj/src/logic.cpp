#include <algorithm>
#include <functional>
#include <set>

#include "bvm/error.hpp"
#include "bvm/logic.hpp"

namespace bvm {

namespace {

std::optional<int> find_decl(const std::vector<SymbolDecl>& decls, std::string_view name) {
  for (std::size_t i = 0; i < decls.size(); ++i) {
    if (decls[i].name == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

}  // namespace

Signature::Signature(std::vector<SymbolDecl> relations, std::vector<SymbolDecl> functions,
                     std::vector<std::string> constants)
    : relations_(std::move(relations)),
      functions_(std::move(functions)),
      constants_(std::move(constants)) {
  std::set<std::string> names;
  auto claim = [&](const std::string& name) {
    if (name.empty() || !names.insert(name).second) {
      throw Error(ErrorKind::kUnknownSymbol, "duplicate or empty symbol name '" + name + "'");
    }
  };
  for (const auto& r : relations_) {
    claim(r.name);
    if (r.arity < 1) throw Error(ErrorKind::kUnknownSymbol, "relation arity must be >= 1");
  }
  for (const auto& f : functions_) {
    claim(f.name);
    if (f.arity < 1) throw Error(ErrorKind::kUnknownSymbol, "function arity must be >= 1");
  }
  for (const auto& c : constants_) claim(c);
}

std::optional<int> Signature::relation_index(std::string_view name) const {
  return find_decl(relations_, name);
}

std::optional<int> Signature::function_index(std::string_view name) const {
  return find_decl(functions_, name);
}

std::optional<int> Signature::constant_index(std::string_view name) const {
  for (std::size_t i = 0; i < constants_.size(); ++i) {
    if (constants_[i] == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

struct Term::Node {
  Kind kind;
  std::string name;
  int index = -1;
  std::vector<Term> args;
};

Term Term::variable(std::string name) {
  return Term(std::make_shared<const Node>(Node{Kind::kVariable, std::move(name), -1, {}}));
}

Term Term::constant(std::string name) {
  return Term(std::make_shared<const Node>(Node{Kind::kConstant, std::move(name), -1, {}}));
}

Term Term::parameter(int index) {
  if (index < 0) throw Error(ErrorKind::kForeignParameter, "negative parameter index");
  return Term(std::make_shared<const Node>(Node{Kind::kParameter, {}, index, {}}));
}

Term Term::function(std::string name, std::vector<Term> args) {
  if (args.empty()) throw Error(ErrorKind::kUnknownSymbol, "function application needs arguments");
  return Term(std::make_shared<const Node>(Node{Kind::kFunction, std::move(name), -1, std::move(args)}));
}

Term::Kind Term::kind() const noexcept { return node_->kind; }
const std::string& Term::name() const noexcept { return node_->name; }
int Term::parameter_index() const noexcept { return node_->index; }
const std::vector<Term>& Term::args() const noexcept { return node_->args; }

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  return a.node_->kind == b.node_->kind && a.node_->name == b.node_->name &&
         a.node_->index == b.node_->index && a.node_->args == b.node_->args;
}

struct Formula::Node {
  Kind kind;
  std::string name;
  std::vector<Term> terms;
  std::vector<Formula> children;
};

Formula Formula::truth() { return Formula(std::make_shared<const Node>(Node{Kind::kTrue, {}, {}, {}})); }
Formula Formula::falsity() { return Formula(std::make_shared<const Node>(Node{Kind::kFalse, {}, {}, {}})); }

Formula Formula::equals(Term lhs, Term rhs) {
  return Formula(std::make_shared<const Node>(
      Node{Kind::kEquals, {}, {std::move(lhs), std::move(rhs)}, {}}));
}

Formula Formula::relation(std::string name, std::vector<Term> args) {
  if (args.empty()) throw Error(ErrorKind::kUnknownSymbol, "relation application needs arguments");
  return Formula(std::make_shared<const Node>(Node{Kind::kRelation, std::move(name), std::move(args), {}}));
}

Formula Formula::negation(Formula operand) {
  return Formula(std::make_shared<const Node>(Node{Kind::kNot, {}, {}, {std::move(operand)}}));
}

Formula Formula::conjunction(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const Node>(Node{Kind::kAnd, {}, {}, {std::move(lhs), std::move(rhs)}}));
}

Formula Formula::disjunction(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const Node>(Node{Kind::kOr, {}, {}, {std::move(lhs), std::move(rhs)}}));
}

Formula Formula::implication(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const Node>(Node{Kind::kImplies, {}, {}, {std::move(lhs), std::move(rhs)}}));
}

Formula Formula::exists(std::string variable, Formula body) {
  return Formula(std::make_shared<const Node>(Node{Kind::kExists, std::move(variable), {}, {std::move(body)}}));
}

Formula Formula::forall(std::string variable, Formula body) {
  return Formula(std::make_shared<const Node>(Node{Kind::kForall, std::move(variable), {}, {std::move(body)}}));
}

Formula::Kind Formula::kind() const noexcept { return node_->kind; }
const std::string& Formula::name() const noexcept { return node_->name; }
const std::vector<Term>& Formula::terms() const noexcept { return node_->terms; }
const std::vector<Formula>& Formula::children() const noexcept { return node_->children; }

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  return a.node_->kind == b.node_->kind && a.node_->name == b.node_->name &&
         a.node_->terms == b.node_->terms && a.node_->children == b.node_->children;
}

std::set<std::string> term_vars(const Term& term) {
  std::set<std::string> out;
  std::function<void(const Term&)> walk = [&](const Term& t) {
    if (t.kind() == Term::Kind::kVariable) out.insert(t.name());
    for (const Term& a : t.args()) walk(a);
  };
  walk(term);
  return out;
}

std::set<std::string> free_vars(const Formula& formula) {
  std::set<std::string> out;
  switch (formula.kind()) {
    case Formula::Kind::kTrue:
    case Formula::Kind::kFalse:
      break;
    case Formula::Kind::kEquals:
    case Formula::Kind::kRelation:
      for (const Term& t : formula.terms()) {
        auto vs = term_vars(t);
        out.insert(vs.begin(), vs.end());
      }
      break;
    case Formula::Kind::kExists:
    case Formula::Kind::kForall:
      out = free_vars(formula.child(0));
      out.erase(formula.name());
      break;
    default:
      for (const Formula& c : formula.children()) {
        auto vs = free_vars(c);
        out.insert(vs.begin(), vs.end());
      }
  }
  return out;
}

bool is_sentence(const Formula& formula) { return free_vars(formula).empty(); }

namespace {

int max_parameter_term(const Term& t) {
  int best = t.kind() == Term::Kind::kParameter ? t.parameter_index() : -1;
  for (const Term& a : t.args()) best = std::max(best, max_parameter_term(a));
  return best;
}

}  // namespace

int max_parameter(const Formula& formula) {
  int best = -1;
  for (const Term& t : formula.terms()) best = std::max(best, max_parameter_term(t));
  for (const Formula& c : formula.children()) best = std::max(best, max_parameter(c));
  return best;
}

int quantifier_rank(const Formula& formula) {
  int best = 0;
  for (const Formula& c : formula.children()) best = std::max(best, quantifier_rank(c));
  return formula.is_quantifier() ? best + 1 : best;
}

int formula_size(const Formula& formula) {
  int size = 1;
  for (const Formula& c : formula.children()) size += formula_size(c);
  return size;
}

namespace {

using Replacements = std::span<const std::pair<std::string, Term>>;

Term substitute_term(const Term& term, Replacements reps) {
  switch (term.kind()) {
    case Term::Kind::kVariable:
      for (const auto& [name, replacement] : reps) {
        if (name == term.name()) return replacement;
      }
      return term;
    case Term::Kind::kFunction: {
      std::vector<Term> args;
      for (const Term& a : term.args()) args.push_back(substitute_term(a, reps));
      return Term::function(term.name(), std::move(args));
    }
    default:
      return term;
  }
}

Formula substitute_impl(const Formula& formula, std::vector<std::pair<std::string, Term>> reps) {
  if (reps.empty()) return formula;
  switch (formula.kind()) {
    case Formula::Kind::kTrue:
    case Formula::Kind::kFalse:
      return formula;
    case Formula::Kind::kEquals:
      return Formula::equals(substitute_term(formula.terms()[0], reps),
                             substitute_term(formula.terms()[1], reps));
    case Formula::Kind::kRelation: {
      std::vector<Term> args;
      for (const Term& t : formula.terms()) args.push_back(substitute_term(t, reps));
      return Formula::relation(formula.name(), std::move(args));
    }
    case Formula::Kind::kNot:
      return Formula::negation(substitute_impl(formula.child(0), reps));
    case Formula::Kind::kAnd:
      return Formula::conjunction(substitute_impl(formula.child(0), reps),
                                  substitute_impl(formula.child(1), reps));
    case Formula::Kind::kOr:
      return Formula::disjunction(substitute_impl(formula.child(0), reps),
                                  substitute_impl(formula.child(1), reps));
    case Formula::Kind::kImplies:
      return Formula::implication(substitute_impl(formula.child(0), reps),
                                  substitute_impl(formula.child(1), reps));
    case Formula::Kind::kExists:
    case Formula::Kind::kForall: {
      const std::string& bound = formula.name();
      std::erase_if(reps, [&](const auto& r) { return r.first == bound; });
      const std::set<std::string> body_free = free_vars(formula.child(0));
      // Only replacements that actually reach an occurrence can capture.
      std::erase_if(reps, [&](const auto& r) { return body_free.count(r.first) == 0; });
      for (const auto& [name, replacement] : reps) {
        if (term_vars(replacement).count(bound) != 0) {
          throw Error(ErrorKind::kCaptureError,
                      "substituting for '" + name + "' would capture '" + bound + "'");
        }
      }
      Formula body = substitute_impl(formula.child(0), reps);
      return formula.kind() == Formula::Kind::kExists ? Formula::exists(bound, body)
                                                      : Formula::forall(bound, body);
    }
  }
  return formula;
}

Term remap_term(const Term& term, std::span<const int> mapping) {
  switch (term.kind()) {
    case Term::Kind::kParameter: {
      const auto i = static_cast<std::size_t>(term.parameter_index());
      if (i >= mapping.size()) {
        throw Error(ErrorKind::kForeignParameter, "no image for parameter #" + std::to_string(i));
      }
      return Term::parameter(mapping[i]);
    }
    case Term::Kind::kFunction: {
      std::vector<Term> args;
      for (const Term& a : term.args()) args.push_back(remap_term(a, mapping));
      return Term::function(term.name(), std::move(args));
    }
    default:
      return term;
  }
}

}  // namespace

Formula substitute(const Formula& formula, const std::string& variable, const Term& replacement) {
  return substitute_impl(formula, {{variable, replacement}});
}

Formula substitute_all(const Formula& formula, Replacements replacements) {
  return substitute_impl(formula, {replacements.begin(), replacements.end()});
}

Formula remap_parameters(const Formula& formula, std::span<const int> mapping) {
  switch (formula.kind()) {
    case Formula::Kind::kTrue:
    case Formula::Kind::kFalse:
      return formula;
    case Formula::Kind::kEquals:
      return Formula::equals(remap_term(formula.terms()[0], mapping),
                             remap_term(formula.terms()[1], mapping));
    case Formula::Kind::kRelation: {
      std::vector<Term> args;
      for (const Term& t : formula.terms()) args.push_back(remap_term(t, mapping));
      return Formula::relation(formula.name(), std::move(args));
    }
    case Formula::Kind::kNot:
      return Formula::negation(remap_parameters(formula.child(0), mapping));
    case Formula::Kind::kAnd:
      return Formula::conjunction(remap_parameters(formula.child(0), mapping),
                                  remap_parameters(formula.child(1), mapping));
    case Formula::Kind::kOr:
      return Formula::disjunction(remap_parameters(formula.child(0), mapping),
                                  remap_parameters(formula.child(1), mapping));
    case Formula::Kind::kImplies:
      return Formula::implication(remap_parameters(formula.child(0), mapping),
                                  remap_parameters(formula.child(1), mapping));
    case Formula::Kind::kExists:
      return Formula::exists(formula.name(), remap_parameters(formula.child(0), mapping));
    case Formula::Kind::kForall:
      return Formula::forall(formula.name(), remap_parameters(formula.child(0), mapping));
  }
  return formula;
}

Formula conjunction_of(std::span<const Formula> formulas) {
  if (formulas.empty()) return Formula::truth();
  Formula out = formulas.front();
  for (std::size_t i = 1; i < formulas.size(); ++i) out = Formula::conjunction(out, formulas[i]);
  return out;
}

Formula exists_all(std::span<const std::string> variables, Formula body) {
  for (auto it = variables.rbegin(); it != variables.rend(); ++it) body = Formula::exists(*it, body);
  return body;
}

namespace {

void check_term_symbols(const Term& t, const Signature& sig) {
  switch (t.kind()) {
    case Term::Kind::kConstant:
      if (!sig.constant_index(t.name())) {
        throw Error(ErrorKind::kUnknownSymbol, "unknown constant '" + t.name() + "'");
      }
      break;
    case Term::Kind::kFunction: {
      auto idx = sig.function_index(t.name());
      if (!idx) throw Error(ErrorKind::kUnknownSymbol, "unknown function '" + t.name() + "'");
      if (sig.functions()[static_cast<std::size_t>(*idx)].arity != static_cast<int>(t.args().size())) {
        throw Error(ErrorKind::kUnknownSymbol, "wrong arity for function '" + t.name() + "'");
      }
      for (const Term& a : t.args()) check_term_symbols(a, sig);
      break;
    }
    default:
      break;
  }
}

}  // namespace

void check_symbols(const Formula& formula, const Signature& signature) {
  if (formula.kind() == Formula::Kind::kRelation) {
    auto idx = signature.relation_index(formula.name());
    if (!idx) throw Error(ErrorKind::kUnknownSymbol, "unknown relation '" + formula.name() + "'");
    if (signature.relations()[static_cast<std::size_t>(*idx)].arity !=
        static_cast<int>(formula.terms().size())) {
      throw Error(ErrorKind::kUnknownSymbol, "wrong arity for relation '" + formula.name() + "'");
    }
  }
  for (const Term& t : formula.terms()) check_term_symbols(t, signature);
  for (const Formula& c : formula.children()) check_symbols(c, signature);
}

}  // namespace bvm

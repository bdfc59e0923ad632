#pragma once

// First-order syntax: signatures, terms, formulas with parameters, the text
// grammar, and bounded formula enumeration.
//
// Grammar (loosest binding first):
//   formula  := implication
//   implication := disjunction ['->' implication]
//   disjunction := conjunction {'|' conjunction}
//   conjunction := unary {'&' unary}
//   unary    := '!' unary | ('exists'|'forall') var {',' var} '.' formula
//             | '(' formula ')' | 'true' | 'false' | atom
//   atom     := R '(' term {',' term} ')' | term ('=' | '!=' | '<') term
//   term     := var | constant | '#' digits | f '(' term {',' term} ')'
//
// Without a signature, an identifier in term position is a variable when it
// starts with one of u..z and a constant otherwise; quantified names are
// always variables inside their scope. `a != b` is read as `!(a = b)` and
// `a < b` as the binary relation named "<".

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bvm {

struct SymbolDecl {
  std::string name;
  int arity = 1;
  friend bool operator==(const SymbolDecl&, const SymbolDecl&) = default;
};

class Signature {
 public:
  Signature() = default;
  Signature(std::vector<SymbolDecl> relations, std::vector<SymbolDecl> functions,
            std::vector<std::string> constants);

  const std::vector<SymbolDecl>& relations() const noexcept { return relations_; }
  const std::vector<SymbolDecl>& functions() const noexcept { return functions_; }
  const std::vector<std::string>& constants() const noexcept { return constants_; }

  std::optional<int> relation_index(std::string_view name) const;
  std::optional<int> function_index(std::string_view name) const;
  std::optional<int> constant_index(std::string_view name) const;

  std::size_t symbol_count() const noexcept {
    return relations_.size() + functions_.size() + constants_.size();
  }

  friend bool operator==(const Signature&, const Signature&) = default;

 private:
  std::vector<SymbolDecl> relations_;
  std::vector<SymbolDecl> functions_;
  std::vector<std::string> constants_;
};

class Term {
 public:
  enum class Kind { kVariable, kConstant, kParameter, kFunction };

  static Term variable(std::string name);
  static Term constant(std::string name);
  static Term parameter(int index);
  static Term function(std::string name, std::vector<Term> args);

  Kind kind() const noexcept;
  const std::string& name() const noexcept;
  int parameter_index() const noexcept;
  const std::vector<Term>& args() const noexcept;

  friend bool operator==(const Term& a, const Term& b);

 private:
  struct Node;
  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

class Formula {
 public:
  enum class Kind { kTrue, kFalse, kEquals, kRelation, kNot, kAnd, kOr, kImplies, kExists, kForall };

  static Formula truth();
  static Formula falsity();
  static Formula equals(Term lhs, Term rhs);
  static Formula relation(std::string name, std::vector<Term> args);
  static Formula negation(Formula operand);
  static Formula conjunction(Formula lhs, Formula rhs);
  static Formula disjunction(Formula lhs, Formula rhs);
  static Formula implication(Formula lhs, Formula rhs);
  static Formula exists(std::string variable, Formula body);
  /// Kept as its own node for printing; every evaluator reads it as ¬∃¬.
  static Formula forall(std::string variable, Formula body);

  Kind kind() const noexcept;
  /// Relation name or bound variable.
  const std::string& name() const noexcept;
  const std::vector<Term>& terms() const noexcept;
  const std::vector<Formula>& children() const noexcept;
  const Formula& child(std::size_t i) const { return children().at(i); }

  bool is_quantifier() const noexcept {
    return kind() == Kind::kExists || kind() == Kind::kForall;
  }

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Sentences handed to the model finder as axioms.
using Theory = std::vector<Formula>;

Formula parse_formula(std::string_view text, const Signature* signature = nullptr);
Term parse_term(std::string_view text, const Signature* signature = nullptr);
/// Checks every symbol of `formula` against `signature`; throws UnknownSymbol.
void check_symbols(const Formula& formula, const Signature& signature);

std::string to_string(const Term& term);
std::string to_string(const Formula& formula);

std::set<std::string> free_vars(const Formula& formula);
std::set<std::string> term_vars(const Term& term);
bool is_sentence(const Formula& formula);
/// Largest parameter index occurring, or -1.
int max_parameter(const Formula& formula);
int quantifier_rank(const Formula& formula);
/// Node count; terms count as part of their atom.
int formula_size(const Formula& formula);

/// Replaces free occurrences of `variable`. Throws CaptureError when a
/// variable of `replacement` would become bound.
Formula substitute(const Formula& formula, const std::string& variable, const Term& replacement);
/// Simultaneous substitution of several variables.
Formula substitute_all(const Formula& formula,
                       std::span<const std::pair<std::string, Term>> replacements);
/// Renumbers parameter #i to #mapping[i].
Formula remap_parameters(const Formula& formula, std::span<const int> mapping);

/// Left-nested conjunction in the given order; `true` for the empty list.
Formula conjunction_of(std::span<const Formula> formulas);
/// ∃v1 ... ∃vk. body
Formula exists_all(std::span<const std::string> variables, Formula body);

struct EnumerationCaps {
  int max_rank = 2;
  /// Node bound; see formula_size.
  int max_size = 4;
  std::size_t max_count = 500000;
  bool function_terms = true;
};

/// Every formula of quantifier rank <= rank and size <= caps.max_size over the
/// signature, the given free variables and parameters #0..#params-1, built
/// from atoms with ¬, ∧ and ∃. Atoms use terms from (variables, parameters,
/// constants, then one application of each function to those); equalities
/// take two distinct terms in term order. ∃ only binds a variable that occurs
/// free in its body; bound variables are named u0, u1, ... skipping names in
/// use. Ordered by size, then atoms, negations, conjunctions (by split point),
/// existentials. Throws CapExceeded past max_rank or max_count.
std::vector<Formula> enumerate_formulas(const Signature& signature, int rank,
                                        std::span<const std::string> variables, int params,
                                        const EnumerationCaps& caps = {});

}  // namespace bvm

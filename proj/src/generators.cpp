#include "bvm/generators.hpp"

#include <algorithm>
#include <set>

#include "bvm/error.hpp"

namespace bvm {

namespace {

const char* const kVariableNames[] = {"x", "y", "z", "u", "v", "w"};

Term random_term(Rng& g, const Signature& sig, int params, const std::vector<std::string>& scope,
                 bool allow_function) {
  std::vector<int> kinds;
  if (!scope.empty()) kinds.push_back(0);
  if (params > 0) kinds.push_back(1);
  if (!sig.constants().empty()) kinds.push_back(2);
  if (allow_function && !sig.functions().empty()) kinds.push_back(3);
  if (kinds.empty()) return Term::variable("x");
  switch (kinds[static_cast<std::size_t>(draw(g, static_cast<int>(kinds.size())))]) {
    case 0: return Term::variable(scope[static_cast<std::size_t>(draw(g, static_cast<int>(scope.size())))]);
    case 1: return Term::parameter(draw(g, params));
    case 2:
      return Term::constant(sig.constants()[static_cast<std::size_t>(draw(g, static_cast<int>(sig.constants().size())))]);
    default: {
      const auto& f = sig.functions()[static_cast<std::size_t>(draw(g, static_cast<int>(sig.functions().size())))];
      std::vector<Term> args;
      for (int i = 0; i < f.arity; ++i) args.push_back(random_term(g, sig, params, scope, false));
      return Term::function(f.name, std::move(args));
    }
  }
}

Formula random_atom(Rng& g, const Signature& sig, int params, const std::vector<std::string>& scope) {
  const int choice = draw(g, 10);
  const bool has_terms = !scope.empty() || params > 0 || !sig.constants().empty();
  if (choice == 0 || !has_terms) return coin(g) ? Formula::truth() : Formula::falsity();
  if (choice <= 3 || sig.relations().empty()) {
    return Formula::equals(random_term(g, sig, params, scope, true), random_term(g, sig, params, scope, true));
  }
  const auto& r = sig.relations()[static_cast<std::size_t>(draw(g, static_cast<int>(sig.relations().size())))];
  std::vector<Term> args;
  for (int i = 0; i < r.arity; ++i) args.push_back(random_term(g, sig, params, scope, true));
  return Formula::relation(r.name, std::move(args));
}

Formula random_formula_in(Rng& g, const Signature& sig, int depth, int params, std::vector<std::string>& scope) {
  if (depth == 0 || draw(g, 4) == 0) return random_atom(g, sig, params, scope);
  switch (draw(g, 6)) {
    case 0: return Formula::negation(random_formula_in(g, sig, depth - 1, params, scope));
    case 1: {
      Formula a = random_formula_in(g, sig, depth - 1, params, scope);
      return Formula::conjunction(a, random_formula_in(g, sig, depth - 1, params, scope));
    }
    case 2: {
      Formula a = random_formula_in(g, sig, depth - 1, params, scope);
      return Formula::disjunction(a, random_formula_in(g, sig, depth - 1, params, scope));
    }
    case 3: {
      Formula a = random_formula_in(g, sig, depth - 1, params, scope);
      return Formula::implication(a, random_formula_in(g, sig, depth - 1, params, scope));
    }
    default: {
      const std::string v = kVariableNames[draw(g, 6)];
      scope.push_back(v);
      Formula body = random_formula_in(g, sig, depth - 1, params, scope);
      scope.pop_back();
      return coin(g) ? Formula::exists(v, body) : Formula::forall(v, body);
    }
  }
}

}  // namespace

Formula random_formula(Rng& g, const Signature& signature, int depth, int params,
                       std::span<const std::string> free_variables) {
  std::vector<std::string> scope(free_variables.begin(), free_variables.end());
  return random_formula_in(g, signature, depth, params, scope);
}

Structure random_structure(Rng& g, const Signature& signature, int size) {
  Structure m(signature, size);
  for (std::size_t c = 0; c < signature.constants().size(); ++c) m.set_constant(static_cast<int>(c), draw(g, size));
  for (std::size_t f = 0; f < signature.functions().size(); ++f) {
    const std::size_t entries = m.function_table(static_cast<int>(f)).size();
    const int arity = signature.functions()[f].arity;
    for (std::size_t e = 0; e < entries; ++e) {
      std::vector<int> args(static_cast<std::size_t>(arity));
      std::size_t rest = e;
      for (int i = arity - 1; i >= 0; --i) {
        args[static_cast<std::size_t>(i)] = static_cast<int>(rest % static_cast<std::size_t>(size));
        rest /= static_cast<std::size_t>(size);
      }
      m.set_value(static_cast<int>(f), args, draw(g, size));
    }
  }
  for (std::size_t r = 0; r < signature.relations().size(); ++r) {
    const std::size_t entries = m.relation_table(static_cast<int>(r)).size();
    const int arity = signature.relations()[r].arity;
    for (std::size_t e = 0; e < entries; ++e) {
      std::vector<int> args(static_cast<std::size_t>(arity));
      std::size_t rest = e;
      for (int i = arity - 1; i >= 0; --i) {
        args[static_cast<std::size_t>(i)] = static_cast<int>(rest % static_cast<std::size_t>(size));
        rest /= static_cast<std::size_t>(size);
      }
      m.set_holds(static_cast<int>(r), args, coin(g));
    }
  }
  return m;
}

Element random_element(Rng& g, const BoolAlg& algebra, bool nonzero) {
  while (true) {
    const Element e = algebra.element(g() & algebra.full_mask());
    if (!nonzero || !e.is_zero()) return e;
  }
}

BValuedStructure random_bundle(Rng& g, const BoolAlg& algebra, const Signature& signature, int max_fiber,
                               int max_elements) {
  const int n = algebra.atom_count();
  std::vector<Structure> fibers;
  int widest = 1;
  std::size_t product = 1;
  for (int e = 0; e < n; ++e) {
    const int size = 1 + draw(g, max_fiber);
    widest = std::max(widest, size);
    product *= static_cast<std::size_t>(size);
    fibers.push_back(random_structure(g, signature, size));
  }
  // The first `widest` tuples cover every fiber value; they are distinct
  // because some coordinate runs through a permutation of its fiber.
  std::vector<std::vector<int>> elements;
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> perms(static_cast<std::size_t>(n));
  for (int e = 0; e < n; ++e) {
    auto& p = perms[static_cast<std::size_t>(e)];
    for (int v = 0; v < fibers[static_cast<std::size_t>(e)].size(); ++v) p.push_back(v);
    for (std::size_t i = p.size(); i > 1; --i) std::swap(p[i - 1], p[static_cast<std::size_t>(draw(g, static_cast<int>(i)))]);
  }
  for (int j = 0; j < widest; ++j) {
    std::vector<int> t(static_cast<std::size_t>(n));
    for (int e = 0; e < n; ++e) {
      const int size = fibers[static_cast<std::size_t>(e)].size();
      t[static_cast<std::size_t>(e)] = j < size ? perms[static_cast<std::size_t>(e)][static_cast<std::size_t>(j)] : draw(g, size);
    }
    seen.insert(t);
    elements.push_back(std::move(t));
  }
  const int target = std::max(widest, std::min(max_elements, static_cast<int>(std::min<std::size_t>(product, 1u << 20))));
  const int wanted = widest + draw(g, target - widest + 1);
  while (static_cast<int>(elements.size()) < wanted) {
    std::vector<int> t(static_cast<std::size_t>(n));
    for (int e = 0; e < n; ++e) t[static_cast<std::size_t>(e)] = draw(g, fibers[static_cast<std::size_t>(e)].size());
    if (seen.insert(t).second) elements.push_back(std::move(t));
  }
  return make_bundle(algebra, std::move(fibers), std::move(elements));
}

Distribution random_distribution(Rng& g, const BoolAlg& algebra, int index_size, const Element& floor) {
  if (floor.is_zero()) throw Error(ErrorKind::kZeroElement, "distribution floor must be nonzero");
  Distribution a = Distribution::constant(algebra, index_size, algebra.one());
  for (Subset s = 1; s <= full_subset(index_size); ++s) {
    Element v = random_element(g, algebra) | floor;
    for (int i : subset_members(s)) v = v & a[s & ~(Subset{1} << i)];
    a[s] = v;
  }
  return a;
}

}  // namespace bvm

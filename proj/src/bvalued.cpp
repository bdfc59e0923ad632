#include "bvm/bvalued.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <set>

#include "bvm/error.hpp"

namespace bvm {

namespace {

using detail::CNode;
using detail::CompiledFormula;
using detail::CTerm;

std::size_t power(int base, int exponent) {
  std::size_t out = 1;
  for (int i = 0; i < exponent; ++i) out *= static_cast<std::size_t>(base);
  return out;
}

/// Calls f(tuple) for every tuple in {0..base-1}^length in lexicographic order.
template <class F>
void for_each_tuple(int base, int length, F&& f) {
  std::vector<int> t(static_cast<std::size_t>(length), 0);
  if (length > 0 && base <= 0) return;
  while (true) {
    f(std::span<const int>(t));
    int k = length;
    while (k > 0) {
      --k;
      if (++t[static_cast<std::size_t>(k)] < base) break;
      t[static_cast<std::size_t>(k)] = 0;
      if (k == 0) return;
    }
    if (length == 0) return;
  }
}

std::size_t encode(std::span<const int> tuple, int base) {
  std::size_t idx = 0;
  for (int v : tuple) idx = idx * static_cast<std::size_t>(base) + static_cast<std::size_t>(v);
  return idx;
}

// Recursive engine: ¬ is complement, ∧ meet, ∃ join over all elements.
class RecursiveEvaluator {
 public:
  explicit RecursiveEvaluator(const BValuedStructure& m)
      : m_(m), full_(m.algebra().full_mask()), size_(m.size()) {
    if (m.is_bundle()) {
      bundle_ = &m.bundle();
    } else {
      tables_ = &m.tables();
    }
  }

  AtomMask run(const CompiledFormula& f, std::span<int> env, std::span<const int> params) {
    params_ = params;
    return node(f.root, env);
  }

 private:
  AtomMask node(const CNode& n, std::span<int> env) {
    switch (n.kind) {
      case CNode::Kind::kTrue: return full_;
      case CNode::Kind::kFalse: return 0;
      case CNode::Kind::kEquals:
      case CNode::Kind::kRelation: return bundle_ ? bundle_atomic(n, env) : table_atomic(n, env);
      case CNode::Kind::kNot: return full_ & ~node(n.kids[0], env);
      case CNode::Kind::kAnd: return node(n.kids[0], env) & node(n.kids[1], env);
      case CNode::Kind::kOr: return node(n.kids[0], env) | node(n.kids[1], env);
      case CNode::Kind::kImplies: return (full_ & ~node(n.kids[0], env)) | node(n.kids[1], env);
      case CNode::Kind::kExists: {
        AtomMask out = 0;
        const auto slot = static_cast<std::size_t>(n.index);
        for (int a = 0; a < size_ && out != full_; ++a) {
          env[slot] = a;
          out |= node(n.kids[0], env);
        }
        return out;
      }
      case CNode::Kind::kForall: {
        // ¬∃¬: the meet of the instances.
        AtomMask out = full_;
        const auto slot = static_cast<std::size_t>(n.index);
        for (int a = 0; a < size_ && out != 0; ++a) {
          env[slot] = a;
          out &= node(n.kids[0], env);
        }
        return out;
      }
    }
    return 0;
  }

  int element_of(const CTerm& t, std::span<const int> env) const {
    return t.kind == CTerm::Kind::kSlot ? env[static_cast<std::size_t>(t.index)]
                                        : params_[static_cast<std::size_t>(t.index)];
  }

  int fiber_term(int atom, const CTerm& t, std::span<const int> env) const {
    const Structure& fiber = bundle_->fibers[static_cast<std::size_t>(atom)];
    switch (t.kind) {
      case CTerm::Kind::kSlot:
      case CTerm::Kind::kParam:
        return bundle_->elements[static_cast<std::size_t>(element_of(t, env))]
                                [static_cast<std::size_t>(atom)];
      case CTerm::Kind::kConst: return fiber.constant(t.index);
      case CTerm::Kind::kFunc: {
        std::vector<int> args;
        args.reserve(t.args.size());
        for (const CTerm& a : t.args) args.push_back(fiber_term(atom, a, env));
        return fiber.apply(t.index, args);
      }
    }
    return 0;
  }

  // Atomic values of a bundle are read off the fibers atom by atom.
  AtomMask bundle_atomic(const CNode& n, std::span<const int> env) const {
    AtomMask out = 0;
    std::vector<int> args(n.terms.size());
    for (std::size_t e = 0; e < bundle_->fibers.size(); ++e) {
      const int atom = static_cast<int>(e);
      for (std::size_t i = 0; i < n.terms.size(); ++i) args[i] = fiber_term(atom, n.terms[i], env);
      const bool holds = n.kind == CNode::Kind::kEquals ? args[0] == args[1]
                                                        : bundle_->fibers[e].holds(n.index, args);
      if (holds) out |= AtomMask{1} << e;
    }
    return out;
  }

  bool is_simple(const CTerm& t) const {
    return t.kind == CTerm::Kind::kSlot || t.kind == CTerm::Kind::kParam;
  }

  // values[b] = ||t = b||.
  std::vector<AtomMask> term_values(const CTerm& t, std::span<const int> env) const {
    std::vector<AtomMask> out(static_cast<std::size_t>(size_), 0);
    switch (t.kind) {
      case CTerm::Kind::kSlot:
      case CTerm::Kind::kParam: {
        const auto a = static_cast<std::size_t>(element_of(t, env));
        for (int b = 0; b < size_; ++b) {
          out[static_cast<std::size_t>(b)] =
              tables_->equality[a * static_cast<std::size_t>(size_) + static_cast<std::size_t>(b)].mask();
        }
        return out;
      }
      case CTerm::Kind::kConst:
        for (int b = 0; b < size_; ++b) {
          out[static_cast<std::size_t>(b)] =
              tables_->constants[static_cast<std::size_t>(t.index)][static_cast<std::size_t>(b)].mask();
        }
        return out;
      case CTerm::Kind::kFunc: {
        std::vector<std::vector<AtomMask>> args;
        for (const CTerm& a : t.args) args.push_back(term_values(a, env));
        const auto& table = tables_->functions[static_cast<std::size_t>(t.index)];
        for_each_tuple(size_, static_cast<int>(args.size()), [&](std::span<const int> tuple) {
          AtomMask weight = full_;
          for (std::size_t i = 0; i < tuple.size() && weight != 0; ++i) {
            weight &= args[i][static_cast<std::size_t>(tuple[i])];
          }
          if (weight == 0) return;
          const std::size_t base = encode(tuple, size_) * static_cast<std::size_t>(size_);
          for (int b = 0; b < size_; ++b) {
            out[static_cast<std::size_t>(b)] |= weight & table[base + static_cast<std::size_t>(b)].mask();
          }
        });
        return out;
      }
    }
    return out;
  }

  // Terms are flattened: ||R(t̄)|| = ⋁_b̄ ⋀_i ||t_i = b_i|| ∧ ||R(b̄)||.
  AtomMask table_atomic(const CNode& n, std::span<const int> env) const {
    const auto size = static_cast<std::size_t>(size_);
    bool simple = true;
    for (const CTerm& t : n.terms) simple = simple && is_simple(t);
    if (simple) {
      std::vector<int> args;
      for (const CTerm& t : n.terms) args.push_back(element_of(t, env));
      if (n.kind == CNode::Kind::kEquals) {
        return tables_->equality[static_cast<std::size_t>(args[0]) * size + static_cast<std::size_t>(args[1])]
            .mask();
      }
      return tables_->relations[static_cast<std::size_t>(n.index)][encode(args, size_)].mask();
    }
    std::vector<std::vector<AtomMask>> values;
    for (const CTerm& t : n.terms) values.push_back(term_values(t, env));
    AtomMask out = 0;
    for_each_tuple(size_, static_cast<int>(values.size()), [&](std::span<const int> tuple) {
      AtomMask weight = full_;
      for (std::size_t i = 0; i < tuple.size() && weight != 0; ++i) {
        weight &= values[i][static_cast<std::size_t>(tuple[i])];
      }
      if (weight == 0) return;
      const AtomMask atomic =
          n.kind == CNode::Kind::kEquals
              ? tables_->equality[static_cast<std::size_t>(tuple[0]) * size + static_cast<std::size_t>(tuple[1])]
                    .mask()
              : tables_->relations[static_cast<std::size_t>(n.index)][encode(tuple, size_)].mask();
      out |= weight & atomic;
    });
    return out;
  }

  const BValuedStructure& m_;
  AtomMask full_;
  int size_;
  const BundleData* bundle_ = nullptr;
  const AbstractData* tables_ = nullptr;
  std::span<const int> params_;
};

// Coordinatewise engine: atom e is in the value iff fiber e satisfies the
// formula at the e-th coordinates of its parameters.
AtomMask coordinatewise(const BundleData& bundle, const CompiledFormula& f, std::span<const int> env,
                        std::span<const int> params) {
  AtomMask out = 0;
  std::vector<int> fiber_env(env.size());
  std::vector<int> fiber_params(params.size());
  for (std::size_t e = 0; e < bundle.fibers.size(); ++e) {
    for (std::size_t i = 0; i < env.size(); ++i) {
      fiber_env[i] = i < static_cast<std::size_t>(f.free_count)
                         ? bundle.elements[static_cast<std::size_t>(env[i])][e]
                         : 0;
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      fiber_params[i] = bundle.elements[static_cast<std::size_t>(params[i])][e];
    }
    if (eval_compiled(bundle.fibers[e], f, fiber_env, fiber_params)) out |= AtomMask{1} << e;
  }
  return out;
}

void check_params(const BValuedStructure& m, std::span<const int> params, int needed) {
  if (static_cast<int>(params.size()) < needed) {
    throw Error(ErrorKind::kUnboundVariable, "no value for parameter #" + std::to_string(params.size()));
  }
  for (int p : params) {
    if (p < 0 || p >= m.size()) {
      throw Error(ErrorKind::kForeignParameter,
                  "parameter " + std::to_string(p) + " is not an element of the structure");
    }
  }
}

struct Prepared {
  CompiledFormula compiled;
  std::vector<int> env;
};

Prepared prepare(const BValuedStructure& m, const Formula& formula, const Assignment& assignment) {
  std::vector<std::string> names;
  Prepared out;
  for (const auto& [name, value] : assignment.variables) {
    if (value < 0 || value >= m.size()) {
      throw Error(ErrorKind::kForeignParameter, "value for '" + name + "' is not an element");
    }
    names.push_back(name);
    out.env.push_back(value);
  }
  out.compiled = detail::compile(formula, m.signature(), names);
  out.env.resize(static_cast<std::size_t>(out.compiled.slot_count), 0);
  check_params(m, assignment.params, out.compiled.param_count);
  return out;
}

// Quotient of an abstract structure at one atom: a ~ b iff the atom lies
// below ||a = b||. Classes are numbered by their least member.
Specialization quotient_at_atom(const AbstractData& t, const Signature& sig, int atom) {
  const int n = t.size;
  std::vector<int> cls(static_cast<std::size_t>(n), -1);
  std::vector<int> reps;
  for (int a = 0; a < n; ++a) {
    if (cls[static_cast<std::size_t>(a)] >= 0) continue;
    const int id = static_cast<int>(reps.size());
    reps.push_back(a);
    for (int b = a; b < n; ++b) {
      if (t.equality[static_cast<std::size_t>(a * n + b)].contains_atom(atom)) {
        cls[static_cast<std::size_t>(b)] = id;
      }
    }
  }
  const int k = static_cast<int>(reps.size());
  Structure s(sig, k);
  for (std::size_t r = 0; r < sig.relations().size(); ++r) {
    const int arity = sig.relations()[r].arity;
    for_each_tuple(k, arity, [&](std::span<const int> tuple) {
      std::vector<int> lifted;
      for (int c : tuple) lifted.push_back(reps[static_cast<std::size_t>(c)]);
      if (t.relations[r][encode(lifted, n)].contains_atom(atom)) s.set_holds(static_cast<int>(r), tuple, true);
    });
  }
  for (std::size_t f = 0; f < sig.functions().size(); ++f) {
    const int arity = sig.functions()[f].arity;
    for_each_tuple(k, arity, [&](std::span<const int> tuple) {
      std::vector<int> lifted;
      for (int c : tuple) lifted.push_back(reps[static_cast<std::size_t>(c)]);
      const std::size_t base = encode(lifted, n) * static_cast<std::size_t>(n);
      for (int b = 0; b < n; ++b) {
        if (t.functions[f][base + static_cast<std::size_t>(b)].contains_atom(atom)) {
          s.set_value(static_cast<int>(f), tuple, cls[static_cast<std::size_t>(b)]);
          return;
        }
      }
      throw Error(ErrorKind::kAxiomViolation, "function '" + sig.functions()[f].name +
                                                  "' has no value at atom " + std::to_string(atom));
    });
  }
  for (std::size_t c = 0; c < sig.constants().size(); ++c) {
    bool found = false;
    for (int b = 0; b < n && !found; ++b) {
      if (t.constants[c][static_cast<std::size_t>(b)].contains_atom(atom)) {
        s.set_constant(static_cast<int>(c), cls[static_cast<std::size_t>(b)]);
        found = true;
      }
    }
    if (!found) {
      throw Error(ErrorKind::kAxiomViolation,
                  "constant '" + sig.constants()[c] + "' has no value at atom " + std::to_string(atom));
    }
  }
  return {std::move(s), std::move(cls)};
}

void violation(int clause, const std::string& what) { throw AxiomViolation(clause, what); }

}  // namespace

int BValuedStructure::size() const noexcept {
  return kind_ == Kind::kBundle ? static_cast<int>(bundle_->elements.size()) : tables_->size;
}

const BundleData& BValuedStructure::bundle() const {
  if (kind_ != Kind::kBundle) throw Error(ErrorKind::kPreconditionFailed, "structure is not a bundle");
  return *bundle_;
}

const AbstractData& BValuedStructure::tables() const {
  if (kind_ != Kind::kAbstract) {
    throw Error(ErrorKind::kPreconditionFailed, "structure is not in table form");
  }
  return *tables_;
}

BValuedStructure make_bundle(const BoolAlg& algebra, std::vector<Structure> fibers,
                             std::optional<std::vector<std::vector<int>>> elements) {
  const int n = algebra.atom_count();
  if (static_cast<int>(fibers.size()) != n) {
    throw Error(ErrorKind::kFiberCountMismatch, std::to_string(fibers.size()) + " fibers for " +
                                                    std::to_string(n) + " atoms");
  }
  for (const Structure& f : fibers) {
    if (f.signature() != fibers.front().signature()) {
      throw Error(ErrorKind::kFiberCountMismatch, "fibers have different signatures");
    }
  }
  auto data = std::make_shared<BundleData>();
  if (!elements) {
    std::size_t total = 1;
    for (const Structure& f : fibers) total *= static_cast<std::size_t>(f.size());
    std::vector<std::vector<int>> all(total, std::vector<int>(static_cast<std::size_t>(n), 0));
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rest = idx;
      for (int e = n - 1; e >= 0; --e) {
        const auto radix = static_cast<std::size_t>(fibers[static_cast<std::size_t>(e)].size());
        all[idx][static_cast<std::size_t>(e)] = static_cast<int>(rest % radix);
        rest /= radix;
      }
    }
    elements = std::move(all);
  }
  std::set<std::vector<int>> seen;
  std::vector<std::vector<bool>> hit(static_cast<std::size_t>(n));
  for (int e = 0; e < n; ++e) hit[static_cast<std::size_t>(e)].assign(static_cast<std::size_t>(fibers[static_cast<std::size_t>(e)].size()), false);
  for (const auto& tuple : *elements) {
    if (static_cast<int>(tuple.size()) != n) {
      throw Error(ErrorKind::kInvalidTuple, "element tuple has " + std::to_string(tuple.size()) +
                                                " coordinates for " + std::to_string(n) + " atoms");
    }
    for (int e = 0; e < n; ++e) {
      const int v = tuple[static_cast<std::size_t>(e)];
      if (v < 0 || v >= fibers[static_cast<std::size_t>(e)].size()) {
        throw Error(ErrorKind::kInvalidTuple, "coordinate " + std::to_string(e) + " out of its fiber");
      }
      hit[static_cast<std::size_t>(e)][static_cast<std::size_t>(v)] = true;
    }
    if (!seen.insert(tuple).second) throw Error(ErrorKind::kInvalidTuple, "duplicate element tuple");
  }
  if (elements->empty()) throw Error(ErrorKind::kInvalidTuple, "a bundle needs at least one element");
  for (int e = 0; e < n; ++e) {
    for (std::size_t v = 0; v < hit[static_cast<std::size_t>(e)].size(); ++v) {
      if (!hit[static_cast<std::size_t>(e)][v]) {
        throw Error(ErrorKind::kInvalidTuple, "no element projects to " + std::to_string(v) +
                                                  " in fiber " + std::to_string(e));
      }
    }
  }
  Signature sig = fibers.front().signature();
  data->fibers = std::move(fibers);
  data->elements = std::move(*elements);
  BValuedStructure out(BValuedStructure::Kind::kBundle, algebra, std::move(sig));
  out.bundle_ = std::move(data);
  return out;
}

BValuedStructure make_abstract(const BoolAlg& algebra, const Signature& sig, AbstractData data) {
  const int n = data.size;
  const auto sz = static_cast<std::size_t>(n);
  const int atoms = algebra.atom_count();
  if (n < 1) violation(1, "a structure needs at least one element");
  auto check_alg = [&](const Element& x) {
    if (x.atom_count() != atoms) throw Error(ErrorKind::kMixedAlgebras, "table value from another algebra");
  };
  if (data.equality.size() != sz * sz) violation(3, "equality table has the wrong size");
  if (data.relations.size() != sig.relations().size() || data.functions.size() != sig.functions().size() ||
      data.constants.size() != sig.constants().size()) {
    violation(3, "tables do not match the signature");
  }
  for (const Element& x : data.equality) check_alg(x);
  auto eq = [&](int a, int b) { return data.equality[static_cast<std::size_t>(a) * sz + static_cast<std::size_t>(b)]; };
  // Clause 3: reflexivity, symmetry, transitivity.
  for (int a = 0; a < n; ++a) {
    if (!eq(a, a).is_one()) violation(3, "||a = a|| < 1 for element " + std::to_string(a));
    for (int b = 0; b < n; ++b) {
      if (eq(a, b) != eq(b, a)) violation(3, "equality is not symmetric");
      for (int c = 0; c < n; ++c) {
        if (!leq(eq(a, b) & eq(b, c), eq(a, c))) violation(3, "equality is not transitive");
      }
      // Clause 7: distinct elements are not identified outright.
      if (a != b && eq(a, b).is_one()) {
        violation(7, "||a = b|| = 1 for distinct elements " + std::to_string(a) + ", " + std::to_string(b));
      }
    }
  }
  auto tuple_eq = [&](std::span<const int> x, std::span<const int> y) {
    Element out = algebra.one();
    for (std::size_t i = 0; i < x.size(); ++i) out = out & eq(x[i], y[i]);
    return out;
  };
  for (std::size_t r = 0; r < sig.relations().size(); ++r) {
    const int arity = sig.relations()[r].arity;
    if (data.relations[r].size() != power(n, arity)) violation(3, "relation table has the wrong size");
    for (const Element& x : data.relations[r]) check_alg(x);
    for_each_tuple(n, arity, [&](std::span<const int> x) {
      for_each_tuple(n, arity, [&](std::span<const int> y) {
        if (!leq(tuple_eq(x, y) & data.relations[r][encode(x, n)], data.relations[r][encode(y, n)])) {
          violation(3, "relation '" + sig.relations()[r].name + "' is not congruent with equality");
        }
      });
    });
  }
  for (std::size_t f = 0; f < sig.functions().size(); ++f) {
    const int arity = sig.functions()[f].arity;
    const auto& table = data.functions[f];
    if (table.size() != power(n, arity + 1)) violation(3, "function table has the wrong size");
    for (const Element& x : table) check_alg(x);
    auto val = [&](std::span<const int> x, int b) {
      return table[encode(x, n) * sz + static_cast<std::size_t>(b)];
    };
    const std::string name = "function '" + sig.functions()[f].name + "'";
    for_each_tuple(n, arity, [&](std::span<const int> x) {
      Element total = algebra.zero();
      for (int b = 0; b < n; ++b) {
        total = total | val(x, b);
        for (int c = 0; c < n; ++c) {
          if (!leq(val(x, b) & val(x, c), eq(b, c))) violation(3, name + " is not single-valued");
          if (!leq(val(x, b) & eq(b, c), val(x, c))) violation(3, name + " is not closed under equality");
        }
      }
      if (!total.is_one()) violation(3, name + " is not total");
      for_each_tuple(n, arity, [&](std::span<const int> y) {
        const Element same = tuple_eq(x, y);
        for (int b = 0; b < n; ++b) {
          if (!leq(same & val(x, b), val(y, b))) violation(3, name + " is not congruent with equality");
        }
      });
    });
  }
  for (std::size_t c = 0; c < sig.constants().size(); ++c) {
    const auto& row = data.constants[c];
    if (row.size() != sz) violation(3, "constant table has the wrong size");
    for (const Element& x : row) check_alg(x);
    const std::string name = "constant '" + sig.constants()[c] + "'";
    Element total = algebra.zero();
    for (int b = 0; b < n; ++b) {
      total = total | row[static_cast<std::size_t>(b)];
      for (int d = 0; d < n; ++d) {
        if (!leq(row[static_cast<std::size_t>(b)] & row[static_cast<std::size_t>(d)], eq(b, d))) {
          violation(3, name + " is not single-valued");
        }
        if (!leq(row[static_cast<std::size_t>(b)] & eq(b, d), row[static_cast<std::size_t>(d)])) {
          violation(3, name + " is not closed under equality");
        }
      }
    }
    if (!total.is_one()) violation(3, name + " has no value somewhere");
  }
  BValuedStructure out(BValuedStructure::Kind::kAbstract, algebra, sig);
  out.tables_ = std::make_shared<AbstractData>(std::move(data));
  return out;
}

BValuedStructure to_abstract(const BValuedStructure& m) {
  if (!m.is_bundle()) return m;
  const BundleData& b = m.bundle();
  const Signature& sig = m.signature();
  const int n = m.size();
  const int atoms = m.algebra().atom_count();
  const auto sz = static_cast<std::size_t>(n);
  AbstractData t;
  t.size = n;
  auto mask_where = [&](auto&& pred) {
    AtomMask mask = 0;
    for (int e = 0; e < atoms; ++e) {
      if (pred(e)) mask |= AtomMask{1} << e;
    }
    return Element(atoms, mask);
  };
  auto coord = [&](int element, int e) {
    return b.elements[static_cast<std::size_t>(element)][static_cast<std::size_t>(e)];
  };
  t.equality.resize(sz * sz);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      t.equality[static_cast<std::size_t>(x) * sz + static_cast<std::size_t>(y)] =
          mask_where([&](int e) { return coord(x, e) == coord(y, e); });
    }
  }
  for (std::size_t r = 0; r < sig.relations().size(); ++r) {
    const int arity = sig.relations()[r].arity;
    std::vector<Element> table(power(n, arity));
    for_each_tuple(n, arity, [&](std::span<const int> x) {
      table[encode(x, n)] = mask_where([&](int e) {
        std::vector<int> args;
        for (int v : x) args.push_back(coord(v, e));
        return b.fibers[static_cast<std::size_t>(e)].holds(static_cast<int>(r), args);
      });
    });
    t.relations.push_back(std::move(table));
  }
  for (std::size_t f = 0; f < sig.functions().size(); ++f) {
    const int arity = sig.functions()[f].arity;
    std::vector<Element> table(power(n, arity + 1));
    for_each_tuple(n, arity, [&](std::span<const int> x) {
      for (int y = 0; y < n; ++y) {
        table[encode(x, n) * sz + static_cast<std::size_t>(y)] = mask_where([&](int e) {
          std::vector<int> args;
          for (int v : x) args.push_back(coord(v, e));
          return b.fibers[static_cast<std::size_t>(e)].apply(static_cast<int>(f), args) == coord(y, e);
        });
      }
    });
    t.functions.push_back(std::move(table));
  }
  for (std::size_t c = 0; c < sig.constants().size(); ++c) {
    std::vector<Element> row(sz);
    for (int y = 0; y < n; ++y) {
      row[static_cast<std::size_t>(y)] = mask_where([&](int e) {
        return b.fibers[static_cast<std::size_t>(e)].constant(static_cast<int>(c)) == coord(y, e);
      });
    }
    t.constants.push_back(std::move(row));
  }
  return make_abstract(m.algebra(), sig, std::move(t));
}

BValuedStructure to_bundle(const BValuedStructure& m) {
  if (m.is_bundle()) return m;
  const int atoms = m.algebra().atom_count();
  std::vector<Structure> fibers;
  std::vector<std::vector<int>> elements(static_cast<std::size_t>(m.size()),
                                         std::vector<int>(static_cast<std::size_t>(atoms), 0));
  for (int e = 0; e < atoms; ++e) {
    Specialization s = quotient_at_atom(m.tables(), m.signature(), e);
    for (int k = 0; k < m.size(); ++k) {
      elements[static_cast<std::size_t>(k)][static_cast<std::size_t>(e)] = s.projection[static_cast<std::size_t>(k)];
    }
    fibers.push_back(std::move(s.structure));
  }
  return make_bundle(m.algebra(), std::move(fibers), std::move(elements));
}

Element eval_bv(const BValuedStructure& m, const Formula& formula, const Assignment& assignment,
                Engine engine) {
  Prepared p = prepare(m, formula, assignment);
  const int atoms = m.algebra().atom_count();
  if (engine == Engine::kRecursive) {
    RecursiveEvaluator ev(m);
    return Element(atoms, ev.run(p.compiled, p.env, assignment.params));
  }
  if (m.is_bundle()) return Element(atoms, coordinatewise(m.bundle(), p.compiled, p.env, assignment.params));
  const BValuedStructure b = to_bundle(m);
  return Element(atoms, coordinatewise(b.bundle(), p.compiled, p.env, assignment.params));
}

namespace {

EnumerationCaps caps_of(const CheckOptions& options) {
  EnumerationCaps caps;
  caps.max_rank = options.max_rank;
  caps.max_size = options.max_size;
  caps.max_count = options.max_count;
  return caps;
}

/// All parameter tuples over `domain` of the given length, lexicographic.
std::vector<std::vector<int>> parameter_tuples(std::span<const int> domain, int length) {
  std::vector<std::vector<int>> out;
  if (domain.empty()) {
    if (length == 0) out.emplace_back();
    return out;
  }
  for_each_tuple(static_cast<int>(domain.size()), length, [&](std::span<const int> t) {
    std::vector<int> tuple;
    for (int i : t) tuple.push_back(domain[static_cast<std::size_t>(i)]);
    out.push_back(std::move(tuple));
  });
  return out;
}

std::vector<int> iota(int n) {
  std::vector<int> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = i;
  return out;
}

}  // namespace

FullnessReport fullness_check(const BValuedStructure& m, int rank, const CheckOptions& options) {
  const std::vector<std::string> vars = {"x"};
  const int params = std::max(0, options.params);
  const auto formulas = enumerate_formulas(m.signature(), rank, vars, params, caps_of(options));
  const auto tuples = parameter_tuples(iota(m.size()), params);
  const int atoms = m.algebra().atom_count();
  std::vector<std::optional<FormulaWitness>> failures(formulas.size());
  for_each_index(formulas.size(), options.execution, [&](std::size_t i) {
    const auto compiled = detail::compile(formulas[i], m.signature(), vars);
    std::vector<int> env(static_cast<std::size_t>(compiled.slot_count), 0);
    RecursiveEvaluator ev(m);
    for (const auto& tuple : tuples) {
      AtomMask join_all = 0;
      std::vector<AtomMask> values(static_cast<std::size_t>(m.size()));
      for (int a = 0; a < m.size(); ++a) {
        env[0] = a;
        values[static_cast<std::size_t>(a)] = ev.run(compiled, env, tuple);
        join_all |= values[static_cast<std::size_t>(a)];
      }
      if (std::find(values.begin(), values.end(), join_all) != values.end()) continue;
      // Report the value attained by the first element with the most atoms.
      AtomMask best = values[0];
      for (AtomMask v : values) {
        if (std::popcount(v) > std::popcount(best)) best = v;
      }
      failures[i] = FormulaWitness{formulas[i], tuple, Element(atoms, join_all), Element(atoms, best)};
      return;
    }
  });
  FullnessReport report;
  report.rank = rank;
  report.formulas_checked = formulas.size();
  for (auto& f : failures) {
    if (f) {
      report.full = false;
      report.counterexample = std::move(f);
      break;
    }
  }
  return report;
}

Specialization specialize(const BValuedStructure& m, const PrincipalFilter& ultrafilter) {
  if (ultrafilter.atom_count() != m.algebra().atom_count()) {
    throw Error(ErrorKind::kMixedAlgebras, "ultrafilter on another algebra");
  }
  const int atom = ultrafilter.ultrafilter_atom();
  if (!m.is_bundle()) return quotient_at_atom(m.tables(), m.signature(), atom);
  const BundleData& b = m.bundle();
  Specialization out{b.fibers[static_cast<std::size_t>(atom)], {}};
  for (const auto& tuple : b.elements) out.projection.push_back(tuple[static_cast<std::size_t>(atom)]);
  return out;
}

Specialization specialize_by_quotient(const BValuedStructure& m, const PrincipalFilter& ultrafilter) {
  if (ultrafilter.atom_count() != m.algebra().atom_count()) {
    throw Error(ErrorKind::kMixedAlgebras, "ultrafilter on another algebra");
  }
  const int atom = ultrafilter.ultrafilter_atom();
  const BValuedStructure t = to_abstract(m);
  return quotient_at_atom(t.tables(), t.signature(), atom);
}

SpecializationReport check_specialization(const BValuedStructure& m, const PrincipalFilter& ultrafilter,
                                          int rank, const CheckOptions& options) {
  const Specialization spec = specialize(m, ultrafilter);
  const int atom = ultrafilter.ultrafilter_atom();
  const int params = std::max(0, options.params);
  const auto formulas = enumerate_formulas(m.signature(), rank, {}, params, caps_of(options));
  const auto tuples = parameter_tuples(iota(m.size()), params);
  const int atoms = m.algebra().atom_count();
  std::vector<std::optional<FormulaWitness>> failures(formulas.size());
  for_each_index(formulas.size(), options.execution, [&](std::size_t i) {
    const auto compiled = detail::compile(formulas[i], m.signature());
    std::vector<int> env(static_cast<std::size_t>(compiled.slot_count), 0);
    RecursiveEvaluator ev(m);
    for (const auto& tuple : tuples) {
      const AtomMask value = ev.run(compiled, env, tuple);
      std::vector<int> projected;
      for (int a : tuple) projected.push_back(spec.projection[static_cast<std::size_t>(a)]);
      const bool holds = eval_compiled(spec.structure, compiled, env, projected);
      if (((value >> atom) & 1U) != (holds ? 1U : 0U)) {
        failures[i] = FormulaWitness{formulas[i], tuple, Element(atoms, value),
                                     holds ? ultrafilter.generator() : Element(atoms, 0)};
        return;
      }
    }
  });
  SpecializationReport report;
  report.formulas_checked = formulas.size();
  for (auto& f : failures) {
    if (f) {
      report.holds = false;
      report.counterexample = std::move(f);
      break;
    }
  }
  return report;
}

ElementaryReport check_elementary(const ElementMap& map, const BValuedStructure& source,
                                  const BValuedStructure& target, int rank, const CheckOptions& options) {
  if (source.algebra() != target.algebra()) {
    throw Error(ErrorKind::kMixedAlgebras, "elementary maps need a common algebra");
  }
  if (source.signature() != target.signature()) {
    throw Error(ErrorKind::kPreconditionFailed, "elementary maps need a common signature");
  }
  std::map<int, int> f;
  for (const auto& [a, b] : map) {
    if (a < 0 || a >= source.size() || b < 0 || b >= target.size()) {
      throw Error(ErrorKind::kInvalidTuple, "element map leaves its structures");
    }
    if (!f.emplace(a, b).second && f[a] != b) {
      throw Error(ErrorKind::kPreconditionFailed, "element map is not a function");
    }
  }
  ElementaryReport report;
  report.rank = rank;
  std::set<int> images;
  for (const auto& [a, b] : f) images.insert(b);
  report.injective = images.size() == f.size();

  std::vector<int> domain;
  for (const auto& [a, b] : f) domain.push_back(a);
  const int params = domain.empty() ? 0 : std::max(0, options.params);
  const auto formulas = enumerate_formulas(source.signature(), rank, {}, params, caps_of(options));
  const auto tuples = parameter_tuples(domain, params);
  const int atoms = source.algebra().atom_count();
  std::vector<std::optional<FormulaWitness>> failures(formulas.size());
  for_each_index(formulas.size(), options.execution, [&](std::size_t i) {
    const auto compiled = detail::compile(formulas[i], source.signature());
    std::vector<int> env(static_cast<std::size_t>(compiled.slot_count), 0);
    RecursiveEvaluator src(source);
    RecursiveEvaluator dst(target);
    for (const auto& tuple : tuples) {
      std::vector<int> image;
      for (int a : tuple) image.push_back(f.at(a));
      const AtomMask lhs = src.run(compiled, env, tuple);
      const AtomMask rhs = dst.run(compiled, env, image);
      if (lhs != rhs) {
        failures[i] = FormulaWitness{formulas[i], tuple, Element(atoms, lhs), Element(atoms, rhs)};
        return;
      }
    }
  });
  report.formulas_checked = formulas.size();
  for (auto& w : failures) {
    if (w) {
      report.elementary = false;
      report.counterexample = std::move(w);
      break;
    }
  }
  // Injectivity follows from preserving ||a = b||; a non-injective map fails
  // even when the formula sweep uses too few parameters to notice.
  if (!report.injective) report.elementary = false;
  return report;
}

namespace {

void check_constraint(const ValueConstraint& vc) {
  if (vc.lower.size() != vc.formulas.size() || vc.upper.size() != vc.formulas.size()) {
    throw Error(ErrorKind::kBadConstraint, "bounds do not match the formula list");
  }
  for (std::size_t i = 0; i < vc.formulas.size(); ++i) {
    if (vc.lower[i].atom_count() != vc.algebra.atom_count() ||
        vc.upper[i].atom_count() != vc.algebra.atom_count()) {
      throw Error(ErrorKind::kMixedAlgebras, "bound from another algebra");
    }
    if (!leq(vc.lower[i], vc.upper[i])) {
      throw Error(ErrorKind::kBadConstraint, "lower bound exceeds upper bound for " + to_string(vc.formulas[i]));
    }
    check_symbols(vc.formulas[i], vc.signature);
    if (max_parameter(vc.formulas[i]) >= vc.parameters) {
      throw Error(ErrorKind::kForeignParameter, "formula uses a parameter outside X: " + to_string(vc.formulas[i]));
    }
  }
}

FinderTask task_below(const ValueConstraint& vc, const Theory& theory, const Element& c, int bound,
                      std::uint64_t budget) {
  FinderTask task;
  task.signature = vc.signature;
  task.axioms = theory;
  task.params = vc.parameters;
  task.bound = bound;
  task.node_budget = budget;
  for (std::size_t i = 0; i < vc.formulas.size(); ++i) {
    if (leq(c, vc.lower[i])) task.positive.push_back(vc.formulas[i]);
    if (leq(c, ~vc.upper[i])) task.negative.push_back(vc.formulas[i]);
  }
  return task;
}

FinderStatus combine(std::span<const FinderStatus> statuses) {
  bool unknown = false;
  for (FinderStatus s : statuses) {
    if (s == FinderStatus::kNone) return FinderStatus::kNone;
    unknown = unknown || s == FinderStatus::kUnknown;
  }
  return unknown ? FinderStatus::kUnknown : FinderStatus::kFound;
}

}  // namespace

CompactnessResult compactness_check_and_synthesize(const ValueConstraint& vc, const Theory& theory, int bound,
                                                   std::uint64_t budget, Execution execution) {
  check_constraint(vc);
  const int atoms = vc.algebra.atom_count();
  std::vector<FinderResult> results(static_cast<std::size_t>(atoms));
  for_each_index(results.size(), execution, [&](std::size_t e) {
    results[e] = find_model(task_below(vc, theory, vc.algebra.atom(static_cast<int>(e)), bound, budget));
  });
  CompactnessResult out;
  for (const auto& r : results) out.per_atom.push_back(r.status);
  out.status = combine(out.per_atom);
  if (out.status != FinderStatus::kFound) return out;

  std::vector<Structure> fibers;
  for (auto& r : results) fibers.push_back(*r.model);
  BValuedStructure m = make_bundle(vc.algebra, std::move(fibers));
  // Full product in lexicographic order: element index of a tuple is its
  // mixed-radix numeral.
  const BundleData& b = m.bundle();
  for (int p = 0; p < vc.parameters; ++p) {
    std::size_t idx = 0;
    for (int e = 0; e < atoms; ++e) {
      idx = idx * static_cast<std::size_t>(b.fibers[static_cast<std::size_t>(e)].size()) +
            static_cast<std::size_t>(results[static_cast<std::size_t>(e)].params[static_cast<std::size_t>(p)]);
    }
    out.embedding.push_back(static_cast<int>(idx));
  }
  Assignment a;
  a.params = out.embedding;
  for (std::size_t i = 0; i < vc.formulas.size(); ++i) {
    const Element v = eval_bv(m, vc.formulas[i], a);
    if (!leq(vc.lower[i], v) || !leq(v, vc.upper[i])) {
      throw Error(ErrorKind::kPreconditionFailed,
                  "synthesized structure misses the bounds of " + to_string(vc.formulas[i]));
    }
  }
  out.structure = std::move(m);
  return out;
}

FinderStatus compactness_condition_literal(const ValueConstraint& vc, const Theory& theory, int bound,
                                           std::uint64_t budget) {
  check_constraint(vc);
  std::vector<FinderStatus> statuses;
  for (const Element& c : vc.algebra.all_elements()) {
    if (c.is_zero()) continue;
    statuses.push_back(find_model(task_below(vc, theory, c, bound, budget)).status);
    if (statuses.back() == FinderStatus::kNone) break;
  }
  return combine(statuses);
}

namespace {

bool is_bijection(const ElementMap& map, int source_size, int target_size) {
  if (source_size != target_size || static_cast<int>(map.size()) != source_size) return false;
  std::set<int> from;
  std::set<int> to;
  for (const auto& [a, b] : map) {
    from.insert(a);
    to.insert(b);
  }
  return static_cast<int>(from.size()) == source_size && static_cast<int>(to.size()) == target_size;
}

int max_fiber(const BValuedStructure& m) {
  int out = 0;
  for (const Structure& f : to_bundle(m).bundle().fibers) out = std::max(out, f.size());
  return out;
}

// Positive and negative atomic facts of `fiber`, with element v named #(offset + v).
void add_diagram(const Structure& fiber, int offset, std::vector<Formula>& positive) {
  const Signature& sig = fiber.signature();
  auto param = [&](int v) { return Term::parameter(offset + v); };
  for (int a = 0; a < fiber.size(); ++a) {
    for (int b = a + 1; b < fiber.size(); ++b) {
      positive.push_back(Formula::negation(Formula::equals(param(a), param(b))));
    }
  }
  for (std::size_t r = 0; r < sig.relations().size(); ++r) {
    for_each_tuple(fiber.size(), sig.relations()[r].arity, [&](std::span<const int> t) {
      std::vector<Term> args;
      for (int v : t) args.push_back(param(v));
      Formula atom = Formula::relation(sig.relations()[r].name, std::move(args));
      positive.push_back(fiber.holds(static_cast<int>(r), t) ? atom : Formula::negation(atom));
    });
  }
  for (std::size_t f = 0; f < sig.functions().size(); ++f) {
    for_each_tuple(fiber.size(), sig.functions()[f].arity, [&](std::span<const int> t) {
      std::vector<Term> args;
      for (int v : t) args.push_back(param(v));
      positive.push_back(Formula::equals(Term::function(sig.functions()[f].name, std::move(args)),
                                         param(fiber.apply(static_cast<int>(f), t))));
    });
  }
  for (std::size_t c = 0; c < sig.constants().size(); ++c) {
    positive.push_back(
        Formula::equals(Term::constant(sig.constants()[c]), param(fiber.constant(static_cast<int>(c)))));
  }
}

int elementary_rank(const ElementMap& f0, const BValuedStructure& m0, const ElementMap& f1,
                    const BValuedStructure& m1, const BValuedStructure& k, int rank,
                    const CheckOptions& options) {
  int best = -1;
  for (int r = 0; r <= rank; ++r) {
    if (!check_elementary(f0, m0, k, r, options).elementary) break;
    if (!check_elementary(f1, m1, k, r, options).elementary) break;
    best = r;
  }
  return best;
}

}  // namespace

Amalgam amalgamate_bounded(const BValuedStructure& base, const BValuedStructure& first,
                           const BValuedStructure& second, const ElementMap& base_to_first,
                           const ElementMap& base_to_second, int rank, int bound, const Theory& theory,
                           const CheckOptions& options, std::uint64_t budget) {
  if (base.algebra() != first.algebra() || base.algebra() != second.algebra()) {
    throw Error(ErrorKind::kMixedAlgebras, "amalgamation needs a common algebra");
  }
  if (static_cast<int>(base_to_first.size()) != base.size() ||
      static_cast<int>(base_to_second.size()) != base.size()) {
    throw Error(ErrorKind::kPreconditionFailed, "embeddings must be total on the base");
  }
  for (const auto* map : {&base_to_first, &base_to_second}) {
    const auto& target = map == &base_to_first ? first : second;
    const ElementaryReport r = check_elementary(*map, base, target, rank, options);
    if (!r.elementary) {
      throw Error(ErrorKind::kNotElementary,
                  "base embedding is not elementary at rank " + std::to_string(rank) +
                      (r.counterexample ? ": " + to_string(r.counterexample->formula) : std::string()));
    }
  }

  Amalgam out;
  auto compose_inverse = [&](const ElementMap& onto, const ElementMap& other) {
    // other ∘ onto⁻¹, defined on the target of `onto`.
    std::map<int, int> base_of;
    for (const auto& [m, a] : onto) base_of[a] = m;
    std::map<int, int> other_of(other.begin(), other.end());
    ElementMap result;
    for (const auto& [a, m] : base_of) result.emplace_back(a, other_of.at(m));
    return result;
  };
  auto identity = [](int n) {
    ElementMap id;
    for (int i = 0; i < n; ++i) id.emplace_back(i, i);
    return id;
  };
  if (is_bijection(base_to_first, base.size(), first.size()) && max_fiber(second) <= bound) {
    out.status = FinderStatus::kFound;
    out.structure = second;
    out.into_from_first = compose_inverse(base_to_first, base_to_second);
    out.into_from_second = identity(second.size());
  } else if (is_bijection(base_to_second, base.size(), second.size()) && max_fiber(first) <= bound) {
    out.status = FinderStatus::kFound;
    out.structure = first;
    out.into_from_first = identity(first.size());
    out.into_from_second = compose_inverse(base_to_second, base_to_first);
  } else {
    const BValuedStructure b0 = to_bundle(first);
    const BValuedStructure b1 = to_bundle(second);
    const int atoms = base.algebra().atom_count();
    std::vector<FinderResult> results(static_cast<std::size_t>(atoms));
    std::vector<int> offsets(static_cast<std::size_t>(atoms));
    for_each_index(results.size(), options.execution, [&](std::size_t e) {
      const Structure& f0 = b0.bundle().fibers[e];
      const Structure& f1 = b1.bundle().fibers[e];
      offsets[e] = f0.size();
      FinderTask task;
      task.signature = base.signature();
      task.axioms = theory;
      task.params = f0.size() + f1.size();
      task.bound = bound;
      task.node_budget = budget;
      add_diagram(f0, 0, task.positive);
      add_diagram(f1, f0.size(), task.positive);
      std::map<int, int> to_second(base_to_second.begin(), base_to_second.end());
      for (const auto& [m, a] : base_to_first) {
        const int x = b0.bundle().elements[static_cast<std::size_t>(a)][e];
        const int y = b1.bundle().elements[static_cast<std::size_t>(to_second.at(m))][e];
        task.positive.push_back(Formula::equals(Term::parameter(x), Term::parameter(f0.size() + y)));
      }
      results[e] = find_model(task);
    });
    std::vector<FinderStatus> statuses;
    for (const auto& r : results) statuses.push_back(r.status);
    const FinderStatus status = combine(statuses);
    if (status != FinderStatus::kFound) {
      out.status = FinderStatus::kUnknown;
      return out;
    }
    std::vector<Structure> fibers;
    for (auto& r : results) fibers.push_back(*r.model);
    BValuedStructure k = make_bundle(base.algebra(), std::move(fibers));
    auto image_index = [&](const std::vector<int>& tuple, bool from_first) {
      std::size_t idx = 0;
      for (int e = 0; e < atoms; ++e) {
        const auto& r = results[static_cast<std::size_t>(e)];
        const int param = (from_first ? 0 : offsets[static_cast<std::size_t>(e)]) + tuple[static_cast<std::size_t>(e)];
        idx = idx * static_cast<std::size_t>(r.model->size()) +
              static_cast<std::size_t>(r.params[static_cast<std::size_t>(param)]);
      }
      return static_cast<int>(idx);
    };
    for (int a = 0; a < first.size(); ++a) {
      out.into_from_first.emplace_back(a, image_index(b0.bundle().elements[static_cast<std::size_t>(a)], true));
    }
    for (int a = 0; a < second.size(); ++a) {
      out.into_from_second.emplace_back(a, image_index(b1.bundle().elements[static_cast<std::size_t>(a)], false));
    }
    out.status = FinderStatus::kFound;
    out.structure = std::move(k);
  }
  out.elementary_rank =
      elementary_rank(out.into_from_first, first, out.into_from_second, second, *out.structure, rank, options);
  return out;
}

}  // namespace bvm

#include "bvm/ultrapower.hpp"

#include "bvm/error.hpp"

namespace bvm {

namespace {

std::size_t checked_power(int base, int exponent, std::size_t cap) {
  std::size_t out = 1;
  for (int i = 0; i < exponent; ++i) {
    out *= static_cast<std::size_t>(base);
    if (out > cap) {
      throw Error(ErrorKind::kSizeOverflow, std::to_string(base) + "^" + std::to_string(exponent) +
                                                " ultrapower elements exceed the cap " + std::to_string(cap));
    }
  }
  return out;
}

}  // namespace

int BooleanUltrapower::index_of(std::span<const int> function) const {
  std::size_t idx = 0;
  for (int v : function) idx = idx * static_cast<std::size_t>(base.size()) + static_cast<std::size_t>(v);
  return static_cast<int>(idx);
}

std::vector<int> BooleanUltrapower::function_of(int index) const {
  return structure.bundle().elements.at(static_cast<std::size_t>(index));
}

BooleanUltrapower boolean_ultrapower(const Structure& base, const BoolAlg& algebra) {
  checked_power(base.size(), algebra.atom_count(), kUltrapowerElementCap);
  std::vector<Structure> fibers(static_cast<std::size_t>(algebra.atom_count()), base);
  return {base, algebra, make_bundle(algebra, std::move(fibers))};
}

std::vector<int> function_from_partition(const BoolAlg& algebra, const Partition& partition) {
  std::vector<int> out(static_cast<std::size_t>(algebra.atom_count()), -1);
  for (std::size_t m = 0; m < partition.size(); ++m) {
    if (partition[m].atom_count() != algebra.atom_count()) {
      throw Error(ErrorKind::kMixedAlgebras, "partition value from another algebra");
    }
    for (int e : partition[m].atoms()) {
      if (out[static_cast<std::size_t>(e)] >= 0) {
        throw Error(ErrorKind::kNotAntichain, "partition values overlap at atom " + std::to_string(e));
      }
      out[static_cast<std::size_t>(e)] = static_cast<int>(m);
    }
  }
  for (int v : out) {
    if (v < 0) throw Error(ErrorKind::kNotMaximal, "partition values do not join to 1");
  }
  return out;
}

Partition partition_from_function(const BoolAlg& algebra, int base_size, std::span<const int> function) {
  Partition out(static_cast<std::size_t>(base_size), algebra.zero());
  for (std::size_t e = 0; e < function.size(); ++e) {
    auto& slot = out.at(static_cast<std::size_t>(function[e]));
    slot = slot | algebra.atom(static_cast<int>(e));
  }
  return out;
}

Element ultrapower_value(const Structure& base, const BoolAlg& algebra, const Formula& formula,
                         std::span<const Partition> args) {
  const auto compiled = detail::compile(formula, base.signature());
  if (static_cast<int>(args.size()) < compiled.param_count) {
    throw Error(ErrorKind::kUnboundVariable, "missing ultrapower parameters");
  }
  for (const Partition& p : args) {
    if (static_cast<int>(p.size()) != base.size()) {
      throw Error(ErrorKind::kForeignParameter, "partition is not indexed by the base structure");
    }
  }
  std::vector<int> env(static_cast<std::size_t>(compiled.slot_count), 0);
  std::vector<int> tuple(args.size(), 0);
  Element out = algebra.zero();
  while (true) {
    Element weight = algebra.one();
    for (std::size_t i = 0; i < args.size() && !weight.is_zero(); ++i) {
      weight = weight & args[i][static_cast<std::size_t>(tuple[i])];
    }
    if (!weight.is_zero() && eval_compiled(base, compiled, env, tuple)) out = out | weight;
    std::size_t k = tuple.size();
    while (k > 0) {
      --k;
      if (++tuple[k] < base.size()) break;
      tuple[k] = 0;
      if (k == 0) return out;
    }
    if (tuple.empty()) return out;
  }
}

std::vector<int> pre_los(const BooleanUltrapower& ultrapower) {
  std::vector<int> out;
  const std::vector<int> constant_fn(static_cast<std::size_t>(ultrapower.algebra.atom_count()), 0);
  for (int a = 0; a < ultrapower.base.size(); ++a) {
    std::vector<int> f(constant_fn.size(), a);
    out.push_back(ultrapower.index_of(f));
  }
  return out;
}

BValuedStructure diagonal(const Structure& base, const BoolAlg& algebra) {
  std::vector<Structure> fibers(static_cast<std::size_t>(algebra.atom_count()), base);
  std::vector<std::vector<int>> elements;
  for (int a = 0; a < base.size(); ++a) elements.emplace_back(static_cast<std::size_t>(algebra.atom_count()), a);
  return make_bundle(algebra, std::move(fibers), std::move(elements));
}

std::vector<int> function_from_inverse(const BoolAlg& algebra, const InversePartition& ip) {
  if (ip.antichain.size() != ip.labels.size()) {
    throw Error(ErrorKind::kInvalidTuple, "inverse partition needs one label per block");
  }
  for (const Element& c : ip.antichain) {
    if (c.atom_count() != algebra.atom_count()) throw Error(ErrorKind::kMixedAlgebras, "block from another algebra");
  }
  if (!antichain_checks(ip.antichain).is_maximal) {
    throw Error(ErrorKind::kNotMaximal, "inverse partition blocks are not a maximal antichain");
  }
  std::vector<int> out(static_cast<std::size_t>(algebra.atom_count()), 0);
  for (std::size_t i = 0; i < ip.antichain.size(); ++i) {
    for (int e : ip.antichain[i].atoms()) out[static_cast<std::size_t>(e)] = ip.labels[i];
  }
  return out;
}

bool equivalent(const BoolAlg& algebra, const InversePartition& a, const InversePartition& b) {
  return function_from_inverse(algebra, a) == function_from_inverse(algebra, b);
}

Element inverse_partition_value(const Structure& base, const BoolAlg& algebra, const Formula& formula,
                                std::span<const InversePartition> args) {
  for (const auto& ip : args) (void)function_from_inverse(algebra, ip);
  const auto compiled = detail::compile(formula, base.signature());
  if (static_cast<int>(args.size()) < compiled.param_count) {
    throw Error(ErrorKind::kUnboundVariable, "missing ultrapower parameters");
  }
  std::vector<int> env(static_cast<std::size_t>(compiled.slot_count), 0);
  std::vector<std::size_t> block(args.size(), 0);
  std::vector<int> labels(args.size(), 0);
  Element out = algebra.zero();
  while (true) {
    Element c = algebra.one();
    for (std::size_t i = 0; i < args.size(); ++i) {
      c = c & args[i].antichain[block[i]];
      labels[i] = args[i].labels[block[i]];
    }
    if (!c.is_zero() && eval_compiled(base, compiled, env, labels)) out = out | c;
    std::size_t k = block.size();
    while (k > 0) {
      --k;
      if (++block[k] < args[k].antichain.size()) break;
      block[k] = 0;
      if (k == 0) return out;
    }
    if (block.empty()) return out;
  }
}

LosReport los_check(const Structure& base, const BoolAlg& algebra, const PrincipalFilter& ultrafilter, int rank,
                    const CheckOptions& options) {
  const BooleanUltrapower up = boolean_ultrapower(base, algebra);
  LosReport report;
  report.atom = ultrafilter.ultrafilter_atom();
  report.rank = rank;
  const Specialization quotient = specialize_by_quotient(up.structure, ultrafilter);
  const std::vector<int> embed = pre_los(up);

  // j(a) = class of i(a); check M ⊨ φ(ā) ⇔ M^B/U ⊨ φ(j ā).
  const int params = std::max(0, options.params);
  EnumerationCaps caps;
  caps.max_rank = options.max_rank;
  caps.max_size = options.max_size;
  caps.max_count = options.max_count;
  const auto formulas = enumerate_formulas(base.signature(), rank, {}, params, caps);
  std::vector<std::optional<FormulaWitness>> failures(formulas.size());
  for_each_index(formulas.size(), options.execution, [&](std::size_t i) {
    const auto compiled = detail::compile(formulas[i], base.signature());
    std::vector<int> env(static_cast<std::size_t>(compiled.slot_count), 0);
    std::vector<int> tuple(static_cast<std::size_t>(params), 0);
    std::vector<int> image(tuple.size(), 0);
    while (true) {
      for (std::size_t k = 0; k < tuple.size(); ++k) {
        image[k] = quotient.projection[static_cast<std::size_t>(embed[static_cast<std::size_t>(tuple[k])])];
      }
      const bool lhs = eval_compiled(base, compiled, env, tuple);
      const bool rhs = eval_compiled(quotient.structure, compiled, env, image);
      if (lhs != rhs) {
        failures[i] = FormulaWitness{formulas[i], tuple, lhs ? algebra.one() : algebra.zero(),
                                     rhs ? algebra.one() : algebra.zero()};
        return;
      }
      std::size_t k = tuple.size();
      while (k > 0) {
        --k;
        if (++tuple[k] < base.size()) break;
        tuple[k] = 0;
        if (k == 0) return;
      }
      if (tuple.empty()) return;
    }
  });
  for (auto& f : failures) {
    if (f) {
      report.elementary = false;
      report.counterexample = std::move(f);
      break;
    }
  }
  // Every class has a member; the class of element k maps to k's value at U's atom.
  report.isomorphism.assign(static_cast<std::size_t>(quotient.structure.size()), -1);
  for (int k = 0; k < up.structure.size(); ++k) {
    const int cls = quotient.projection[static_cast<std::size_t>(k)];
    report.isomorphism[static_cast<std::size_t>(cls)] = up.function_of(k)[static_cast<std::size_t>(report.atom)];
  }
  report.isomorphism_ok = is_isomorphism(quotient.structure, base, report.isomorphism);
  return report;
}

}  // namespace bvm

#include "oracles/oracles.hpp"

#include <stdexcept>

namespace bvm::oracle {

namespace {

std::size_t power(int base, int exponent) {
  std::size_t out = 1;
  for (int i = 0; i < exponent; ++i) out *= static_cast<std::size_t>(base);
  return out;
}

std::vector<int> digits(std::size_t index, int base, int length) {
  std::vector<int> out(static_cast<std::size_t>(length), 0);
  for (int i = length - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = static_cast<int>(index % static_cast<std::size_t>(base));
    index /= static_cast<std::size_t>(base);
  }
  return out;
}

}  // namespace

void for_each_interpretation(const Signature& signature, int params, int size,
                             const std::function<bool(const Structure&, std::span<const int>)>& visit) {
  // Position radices in vector order.
  std::vector<int> radix;
  for (std::size_t c = 0; c < signature.constants().size(); ++c) radix.push_back(size);
  for (int p = 0; p < params; ++p) radix.push_back(size);
  for (const auto& f : signature.functions()) {
    for (std::size_t e = 0; e < power(size, f.arity); ++e) radix.push_back(size);
  }
  for (const auto& r : signature.relations()) {
    for (std::size_t e = 0; e < power(size, r.arity); ++e) radix.push_back(2);
  }
  std::vector<int> v(radix.size(), 0);
  while (true) {
    Structure m(signature, size);
    std::size_t pos = 0;
    for (std::size_t c = 0; c < signature.constants().size(); ++c) m.set_constant(static_cast<int>(c), v[pos++]);
    std::vector<int> pv;
    for (int p = 0; p < params; ++p) pv.push_back(v[pos++]);
    for (std::size_t f = 0; f < signature.functions().size(); ++f) {
      const int arity = signature.functions()[f].arity;
      for (std::size_t e = 0; e < power(size, arity); ++e) {
        m.set_value(static_cast<int>(f), digits(e, size, arity), v[pos++]);
      }
    }
    for (std::size_t r = 0; r < signature.relations().size(); ++r) {
      const int arity = signature.relations()[r].arity;
      for (std::size_t e = 0; e < power(size, arity); ++e) {
        m.set_holds(static_cast<int>(r), digits(e, size, arity), v[pos++] == 1);
      }
    }
    if (visit(m, pv)) return;
    std::size_t k = v.size();
    while (true) {
      if (k == 0) return;
      --k;
      if (++v[k] < radix[k]) break;
      v[k] = 0;
    }
  }
}

std::optional<Model> brute_force_find(const FinderTask& task) {
  for (int size = 1; size <= task.bound; ++size) {
    std::optional<Model> found;
    for_each_interpretation(task.signature, task.params, size, [&](const Structure& m, std::span<const int> p) {
      Assignment a;
      a.params.assign(p.begin(), p.end());
      for (const Formula& f : task.axioms) {
        if (!eval_ordinary(m, f, a)) return false;
      }
      for (const Formula& f : task.positive) {
        if (!eval_ordinary(m, f, a)) return false;
      }
      for (const Formula& f : task.negative) {
        if (eval_ordinary(m, f, a)) return false;
      }
      found = Model{m, a.params};
      return true;
    });
    if (found) return found;
  }
  return std::nullopt;
}

int max_antichain_size(int atoms) {
  if (atoms > 4) throw std::invalid_argument("max_antichain_size needs atoms <= 4");
  const int elements = 1 << atoms;
  int best = 0;
  // Families of nonzero elements as bitsets over masks 1..2^n-1.
  const std::uint64_t families = std::uint64_t{1} << (elements - 1);
  for (std::uint64_t fam = 0; fam < families; ++fam) {
    std::vector<int> members;
    for (int m = 1; m < elements; ++m) {
      if ((fam >> (m - 1)) & 1U) members.push_back(m);
    }
    bool ok = true;
    for (std::size_t i = 0; i < members.size() && ok; ++i) {
      for (std::size_t j = i + 1; j < members.size() && ok; ++j) ok = (members[i] & members[j]) == 0;
    }
    if (ok) best = std::max(best, static_cast<int>(members.size()));
  }
  return best;
}

std::vector<std::set<Subset>> downward_closed_families(int n) {
  if (n > 4) throw std::invalid_argument("downward_closed_families needs n <= 4");
  const int subsets = 1 << n;
  std::vector<std::set<Subset>> out;
  for (std::uint64_t fam = 0; fam < (std::uint64_t{1} << subsets); ++fam) {
    bool closed = true;
    for (int t = 0; t < subsets && closed; ++t) {
      if (!((fam >> t) & 1U)) continue;
      for (int u = 0; u < subsets && closed; ++u) {
        if ((u & t) == u && !((fam >> u) & 1U)) closed = false;
      }
    }
    if (!closed) continue;
    std::set<Subset> family;
    for (int t = 0; t < subsets; ++t) {
      if ((fam >> t) & 1U) family.insert(static_cast<Subset>(t));
    }
    out.push_back(std::move(family));
  }
  return out;
}

bool common_member(std::span<const std::set<int>> sets, Subset t) {
  std::optional<std::set<int>> acc;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (!((t >> i) & 1U)) continue;
    if (!acc) {
      acc = sets[i];
      continue;
    }
    std::set<int> next;
    for (int x : *acc) {
      if (sets[i].count(x)) next.insert(x);
    }
    acc = std::move(next);
  }
  // The empty intersection is taken to be nonempty.
  return !acc || !acc->empty();
}

}  // namespace bvm::oracle

#include <map>
#include <tuple>

#include "bvm/error.hpp"
#include "bvm/logic.hpp"

namespace bvm {

namespace {

class Enumerator {
 public:
  Enumerator(const Signature& sig, std::vector<std::string> base_vars, int params,
             const EnumerationCaps& caps)
      : sig_(sig), base_vars_(std::move(base_vars)), params_(params), caps_(caps) {}

  std::vector<Formula> run(int rank) {
    std::vector<Formula> out;
    for (int size = 1; size <= caps_.max_size; ++size) {
      const auto& layer = exact(rank, 0, size);
      out.insert(out.end(), layer.begin(), layer.end());
      check_count(out.size());
    }
    return out;
  }

 private:
  using Key = std::tuple<int, int, int>;

  void check_count(std::size_t n) const {
    if (n > caps_.max_count) {
      throw Error(ErrorKind::kCapExceeded,
                  "formula enumeration exceeds " + std::to_string(caps_.max_count) + " formulas");
    }
  }

  // Variables in scope after `extra` nested binders.
  const std::vector<std::string>& vars_at(int extra) {
    while (static_cast<int>(scopes_.size()) <= extra) {
      if (scopes_.empty()) {
        scopes_.push_back(base_vars_);
        continue;
      }
      std::vector<std::string> next = scopes_.back();
      next.push_back(fresh_name(next));
      scopes_.push_back(std::move(next));
    }
    return scopes_[static_cast<std::size_t>(extra)];
  }

  static std::string fresh_name(const std::vector<std::string>& used) {
    for (int i = 0;; ++i) {
      std::string candidate = "u" + std::to_string(i);
      bool taken = false;
      for (const auto& u : used) taken = taken || u == candidate;
      if (!taken) return candidate;
    }
  }

  std::vector<Term> terms_for(const std::vector<std::string>& vars) const {
    std::vector<Term> base;
    for (const auto& v : vars) base.push_back(Term::variable(v));
    for (int p = 0; p < params_; ++p) base.push_back(Term::parameter(p));
    for (const auto& c : sig_.constants()) base.push_back(Term::constant(c));
    std::vector<Term> out = base;
    if (caps_.function_terms) {
      for (const auto& f : sig_.functions()) {
        for_each_tuple(base, f.arity, [&](const std::vector<Term>& args) {
          out.push_back(Term::function(f.name, args));
        });
      }
    }
    return out;
  }

  template <class F>
  static void for_each_tuple(const std::vector<Term>& pool, int arity, F&& f) {
    if (pool.empty()) return;
    std::vector<std::size_t> idx(static_cast<std::size_t>(arity), 0);
    std::vector<Term> tuple(static_cast<std::size_t>(arity), pool.front());
    while (true) {
      for (std::size_t i = 0; i < idx.size(); ++i) tuple[i] = pool[idx[i]];
      f(tuple);
      std::size_t k = idx.size();
      while (k > 0) {
        --k;
        if (++idx[k] < pool.size()) break;
        idx[k] = 0;
        if (k == 0) return;
      }
    }
  }

  std::vector<Formula> atoms_for(const std::vector<std::string>& vars) const {
    const std::vector<Term> terms = terms_for(vars);
    std::vector<Formula> out;
    for (const auto& r : sig_.relations()) {
      for_each_tuple(terms, r.arity, [&](const std::vector<Term>& args) {
        out.push_back(Formula::relation(r.name, args));
      });
    }
    for (std::size_t i = 0; i < terms.size(); ++i) {
      for (std::size_t j = i + 1; j < terms.size(); ++j) {
        out.push_back(Formula::equals(terms[i], terms[j]));
      }
    }
    return out;
  }

  const std::vector<Formula>& exact(int rank, int extra, int size) {
    const Key key{rank, extra, size};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::vector<Formula> out;
    const std::vector<std::string> vars = vars_at(extra);
    if (size == 1) {
      out = atoms_for(vars);
    } else {
      for (const Formula& f : exact(rank, extra, size - 1)) out.push_back(Formula::negation(f));
      for (int left = 1; left <= size - 2; ++left) {
        const auto& lhs = exact(rank, extra, left);
        const auto& rhs = exact(rank, extra, size - 1 - left);
        check_count(out.size() + lhs.size() * rhs.size());
        for (const Formula& a : lhs) {
          for (const Formula& b : rhs) out.push_back(Formula::conjunction(a, b));
        }
      }
      if (rank >= 1) {
        const std::string bound = vars_at(extra + 1).back();
        for (const Formula& body : exact(rank - 1, extra + 1, size - 1)) {
          if (free_vars(body).count(bound) != 0) out.push_back(Formula::exists(bound, body));
        }
      }
    }
    check_count(out.size());
    return memo_.emplace(key, std::move(out)).first->second;
  }

  const Signature& sig_;
  std::vector<std::string> base_vars_;
  int params_;
  EnumerationCaps caps_;
  std::vector<std::vector<std::string>> scopes_;
  std::map<Key, std::vector<Formula>> memo_;
};

}  // namespace

std::vector<Formula> enumerate_formulas(const Signature& signature, int rank,
                                        std::span<const std::string> variables, int params,
                                        const EnumerationCaps& caps) {
  if (rank < 0 || rank > caps.max_rank) {
    throw Error(ErrorKind::kCapExceeded, "rank " + std::to_string(rank) + " exceeds the cap " +
                                             std::to_string(caps.max_rank));
  }
  if (params < 0) throw Error(ErrorKind::kForeignParameter, "negative parameter count");
  return Enumerator(signature, {variables.begin(), variables.end()}, params, caps).run(rank);
}

}  // namespace bvm

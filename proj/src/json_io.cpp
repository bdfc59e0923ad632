#include "bvm/json_io.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bvm/error.hpp"

namespace bvm::io {

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json parse_text(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError("", std::string("not JSON: ") + e.what());
  }
}

Json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("", "cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_text(text.str());
}

void store_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("", "cannot write " + path);
  out << dump(j);
}

std::string pointer_append(const std::string& base, std::string_view token) {
  std::string out = base + "/";
  for (char c : token) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

namespace {

std::string at_index(const std::string& base, std::size_t i) { return pointer_append(base, std::to_string(i)); }

const Json& field(const Json& j, const std::string& at, std::string_view key) {
  if (!j.is_object()) throw FormatError(at, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw FormatError(pointer_append(at, key), "missing field");
  return *it;
}

const Json* optional_field(const Json& j, const std::string& at, std::string_view key) {
  if (!j.is_object()) throw FormatError(at, "expected an object");
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

const Json& array(const Json& j, const std::string& at) {
  if (!j.is_array()) throw FormatError(at, "expected an array");
  return j;
}

const Json& object(const Json& j, const std::string& at) {
  if (!j.is_object()) throw FormatError(at, "expected an object");
  return j;
}

long long integer(const Json& j, const std::string& at, long long lo, long long hi) {
  if (!j.is_number_integer()) throw FormatError(at, "expected an integer");
  const long long v = j.get<long long>();
  if (v < lo || v > hi) {
    throw FormatError(at, "value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
  }
  return v;
}

int small_int(const Json& j, const std::string& at, int lo, int hi) {
  return static_cast<int>(integer(j, at, lo, hi));
}

std::string text(const Json& j, const std::string& at) {
  if (!j.is_string()) throw FormatError(at, "expected a string");
  return j.get<std::string>();
}

// Library errors raised while building a value become format errors at `at`.
template <class F>
auto guarded(const std::string& at, F&& build) -> decltype(build()) {
  try {
    return build();
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(at, std::string(error_kind_name(e.kind())) + ": " + e.what());
  }
}

Subset subset_from_key(const std::string& key, int size, const std::string& at) {
  Subset s = 0;
  if (!parse_subset_key(key, size, s)) throw FormatError(at, "bad index-set key \"" + key + "\"");
  if (subset_key(s) != key) throw FormatError(at, "index-set key \"" + key + "\" is not canonical");
  return s;
}

int index_size_from_json(const Json& j, const std::string& at) {
  const Json& idx = array(j, at);
  if (idx.size() > static_cast<std::size_t>(kMaxIndexSize)) throw FormatError(at, "index set too large");
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (integer(idx[i], at_index(at, i), 0, kMaxIndexSize) != static_cast<long long>(i)) {
      throw FormatError(at_index(at, i), "index set must be 0..m-1 in order");
    }
  }
  return static_cast<int>(idx.size());
}

Json index_json(int m) {
  Json idx = Json::array();
  for (int i = 0; i < m; ++i) idx.push_back(i);
  return idx;
}

std::vector<Formula> formulas_from_json(const Json& j, const Signature* signature, const std::string& at) {
  std::vector<Formula> out;
  for (std::size_t i = 0; i < array(j, at).size(); ++i) out.push_back(formula_from_json(j[i], signature, at_index(at, i)));
  return out;
}

Json formulas_json(std::span<const Formula> formulas) {
  Json out = Json::array();
  for (const Formula& f : formulas) out.push_back(to_json(f));
  return out;
}

std::vector<Element> elements_from_json(const Json& j, const BoolAlg& algebra, const std::string& at) {
  std::vector<Element> out;
  for (std::size_t i = 0; i < array(j, at).size(); ++i) out.push_back(element_from_json(j[i], algebra, at_index(at, i)));
  return out;
}

Json elements_json(std::span<const Element> elements) {
  Json out = Json::array();
  for (const Element& e : elements) out.push_back(to_json(e));
  return out;
}

std::vector<std::string> strings_from_json(const Json& j, const std::string& at) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < array(j, at).size(); ++i) out.push_back(text(j[i], at_index(at, i)));
  return out;
}

std::size_t power(int base, int exponent) {
  std::size_t out = 1;
  for (int i = 0; i < exponent; ++i) out *= static_cast<std::size_t>(base);
  return out;
}

std::vector<int> tuple_of(std::size_t index, int size, int arity) {
  std::vector<int> args(static_cast<std::size_t>(arity));
  for (int k = arity - 1; k >= 0; --k) {
    args[static_cast<std::size_t>(k)] = static_cast<int>(index % static_cast<std::size_t>(size));
    index /= static_cast<std::size_t>(size);
  }
  return args;
}

Json structure_body(const Structure& s) {
  const Signature& sig = s.signature();
  Json rel = Json::object();
  for (std::size_t r = 0; r < sig.relations().size(); ++r) {
    Json tuples = Json::array();
    const auto& table = s.relation_table(static_cast<int>(r));
    for (std::size_t k = 0; k < table.size(); ++k) {
      if (table[k]) tuples.push_back(tuple_of(k, s.size(), sig.relations()[r].arity));
    }
    rel[sig.relations()[r].name] = tuples;
  }
  Json fun = Json::object();
  for (std::size_t f = 0; f < sig.functions().size(); ++f) fun[sig.functions()[f].name] = s.function_table(static_cast<int>(f));
  Json con = Json::object();
  for (std::size_t c = 0; c < sig.constants().size(); ++c) con[sig.constants()[c]] = s.constant(static_cast<int>(c));
  return Json{{"size", s.size()}, {"relations", rel}, {"functions", fun}, {"constants", con}};
}

void check_keys(const Json& obj, const std::string& at, const std::set<std::string>& expected) {
  for (const auto& [key, value] : object(obj, at).items()) {
    if (!expected.contains(key)) throw FormatError(pointer_append(at, key), "symbol not in the signature");
  }
}

std::set<std::string> names_of(const std::vector<SymbolDecl>& decls) {
  std::set<std::string> out;
  for (const auto& d : decls) out.insert(d.name);
  return out;
}

Structure structure_body_from_json(const Json& j, const Signature& sig, const std::string& at) {
  const int size = small_int(field(j, at, "size"), pointer_append(at, "size"), 1, 64);
  Structure s = guarded(at, [&] { return Structure(sig, size); });
  const std::string rel_at = pointer_append(at, "relations");
  const Json& rel = object(field(j, at, "relations"), rel_at);
  check_keys(rel, rel_at, names_of(sig.relations()));
  for (std::size_t r = 0; r < sig.relations().size(); ++r) {
    const auto& decl = sig.relations()[r];
    const std::string r_at = pointer_append(rel_at, decl.name);
    const Json& tuples = array(field(rel, rel_at, decl.name), r_at);
    for (std::size_t k = 0; k < tuples.size(); ++k) {
      const std::string t_at = at_index(r_at, k);
      if (array(tuples[k], t_at).size() != static_cast<std::size_t>(decl.arity)) throw FormatError(t_at, "wrong arity");
      std::vector<int> args;
      for (std::size_t a = 0; a < tuples[k].size(); ++a) args.push_back(small_int(tuples[k][a], at_index(t_at, a), 0, size - 1));
      s.set_holds(static_cast<int>(r), args, true);
    }
  }
  const std::string fun_at = pointer_append(at, "functions");
  const Json& fun = object(field(j, at, "functions"), fun_at);
  check_keys(fun, fun_at, names_of(sig.functions()));
  for (std::size_t f = 0; f < sig.functions().size(); ++f) {
    const auto& decl = sig.functions()[f];
    const std::string f_at = pointer_append(fun_at, decl.name);
    const Json& table = array(field(fun, fun_at, decl.name), f_at);
    if (table.size() != power(size, decl.arity)) throw FormatError(f_at, "function table has the wrong length");
    for (std::size_t k = 0; k < table.size(); ++k) {
      s.set_value(static_cast<int>(f), tuple_of(k, size, decl.arity), small_int(table[k], at_index(f_at, k), 0, size - 1));
    }
  }
  const std::string con_at = pointer_append(at, "constants");
  const Json& con = object(field(j, at, "constants"), con_at);
  check_keys(con, con_at, std::set<std::string>(sig.constants().begin(), sig.constants().end()));
  for (std::size_t c = 0; c < sig.constants().size(); ++c) {
    const std::string& name = sig.constants()[c];
    s.set_constant(static_cast<int>(c), small_int(field(con, con_at, name), pointer_append(con_at, name), 0, size - 1));
  }
  return s;
}

Json table_json(std::span<const Element> values) { return elements_json(values); }

Json term_ast(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::kVariable:
      return Json{{"kind", "variable"}, {"name", t.name()}};
    case Term::Kind::kConstant:
      return Json{{"kind", "constant"}, {"name", t.name()}};
    case Term::Kind::kParameter:
      return Json{{"kind", "parameter"}, {"index", t.parameter_index()}};
    case Term::Kind::kFunction: {
      Json args = Json::array();
      for (const Term& a : t.args()) args.push_back(term_ast(a));
      return Json{{"kind", "function"}, {"name", t.name()}, {"args", args}};
    }
  }
  return {};
}

std::string_view formula_kind_name(Formula::Kind k) {
  switch (k) {
    case Formula::Kind::kTrue: return "true";
    case Formula::Kind::kFalse: return "false";
    case Formula::Kind::kEquals: return "equals";
    case Formula::Kind::kRelation: return "relation";
    case Formula::Kind::kNot: return "not";
    case Formula::Kind::kAnd: return "and";
    case Formula::Kind::kOr: return "or";
    case Formula::Kind::kImplies: return "implies";
    case Formula::Kind::kExists: return "exists";
    case Formula::Kind::kForall: return "forall";
  }
  return "?";
}

}  // namespace

Json to_json(const BoolAlg& algebra) {
  Json j{{"atoms", algebra.atom_count()}};
  if (!algebra.labels().empty()) j["labels"] = algebra.labels();
  return j;
}

BoolAlg algebra_from_json(const Json& j, const std::string& at) {
  const int n = small_int(field(j, at, "atoms"), pointer_append(at, "atoms"), 1, 63);
  std::vector<std::string> labels;
  if (const Json* l = optional_field(j, at, "labels")) {
    labels = strings_from_json(*l, pointer_append(at, "labels"));
    if (labels.size() != static_cast<std::size_t>(n)) throw FormatError(pointer_append(at, "labels"), "one label per atom");
  }
  return guarded(at, [&] { return BoolAlg(n, labels); });
}

Json to_json(const Element& element) { return element.atoms(); }

Element element_from_json(const Json& j, const BoolAlg& algebra, const std::string& at) {
  AtomMask mask = 0;
  for (std::size_t i = 0; i < array(j, at).size(); ++i) {
    const int atom = small_int(j[i], at_index(at, i), 0, algebra.atom_count() - 1);
    if ((mask >> atom) & 1U) throw FormatError(at_index(at, i), "atom listed twice");
    mask |= AtomMask{1} << atom;
  }
  return algebra.element(mask);
}

Json to_json(const Signature& signature) {
  auto decls = [](const std::vector<SymbolDecl>& ds) {
    Json out = Json::array();
    for (const auto& d : ds) out.push_back(Json{{"name", d.name}, {"arity", d.arity}});
    return out;
  };
  return Json{{"relations", decls(signature.relations())},
              {"functions", decls(signature.functions())},
              {"constants", signature.constants()}};
}

Signature signature_from_json(const Json& j, const std::string& at) {
  auto decls = [&](std::string_view key) {
    std::vector<SymbolDecl> out;
    const std::string k_at = pointer_append(at, key);
    const Json* list = optional_field(j, at, key);
    if (!list) return out;
    for (std::size_t i = 0; i < array(*list, k_at).size(); ++i) {
      const std::string d_at = at_index(k_at, i);
      out.push_back({text(field((*list)[i], d_at, "name"), pointer_append(d_at, "name")),
                     small_int(field((*list)[i], d_at, "arity"), pointer_append(d_at, "arity"), 0, 4)});
    }
    return out;
  };
  std::vector<std::string> constants;
  if (const Json* c = optional_field(j, at, "constants")) constants = strings_from_json(*c, pointer_append(at, "constants"));
  auto relations = decls("relations");
  auto functions = decls("functions");
  return guarded(at, [&] { return Signature(relations, functions, constants); });
}

Json to_json(const Formula& formula) { return to_string(formula); }

Formula formula_from_json(const Json& j, const Signature* signature, const std::string& at) {
  const std::string source = text(j, at);
  try {
    return parse_formula(source, signature);
  } catch (const Error& e) {
    throw FormatError(at, std::string(error_kind_name(e.kind())) + ": " + e.what());
  }
}

Json formula_ast(const Formula& f) {
  Json out{{"kind", formula_kind_name(f.kind())}};
  switch (f.kind()) {
    case Formula::Kind::kEquals:
    case Formula::Kind::kRelation: {
      Json terms = Json::array();
      for (const Term& t : f.terms()) terms.push_back(term_ast(t));
      out["terms"] = terms;
      if (f.kind() == Formula::Kind::kRelation) out["name"] = f.name();
      break;
    }
    case Formula::Kind::kExists:
    case Formula::Kind::kForall:
      out["variable"] = f.name();
      [[fallthrough]];
    default: {
      if (!f.children().empty()) {
        Json children = Json::array();
        for (const Formula& c : f.children()) children.push_back(formula_ast(c));
        out["children"] = children;
      }
    }
  }
  return out;
}

Json to_json(const Structure& structure) {
  Json j = structure_body(structure);
  j["signature"] = to_json(structure.signature());
  return j;
}

Structure structure_from_json(const Json& j, const std::string& at) {
  const Signature sig = signature_from_json(field(j, at, "signature"), pointer_append(at, "signature"));
  return structure_body_from_json(j, sig, at);
}

Json to_json(const BValuedStructure& m) {
  Json j{{"algebra", to_json(m.algebra())}, {"signature", to_json(m.signature())}};
  if (m.is_bundle()) {
    j["kind"] = "bundle";
    Json fibers = Json::array();
    for (const Structure& s : m.bundle().fibers) fibers.push_back(structure_body(s));
    j["fibers"] = fibers;
    j["elements"] = m.bundle().elements;
    return j;
  }
  const AbstractData& t = m.tables();
  const Signature& sig = m.signature();
  j["kind"] = "abstract";
  j["size"] = t.size;
  j["equality"] = table_json(t.equality);
  Json rel = Json::object();
  for (std::size_t r = 0; r < sig.relations().size(); ++r) rel[sig.relations()[r].name] = table_json(t.relations[r]);
  Json con = Json::object();
  for (std::size_t c = 0; c < sig.constants().size(); ++c) con[sig.constants()[c]] = table_json(t.constants[c]);
  Json fun = Json::object();
  for (std::size_t f = 0; f < sig.functions().size(); ++f) fun[sig.functions()[f].name] = table_json(t.functions[f]);
  j["relations"] = rel;
  j["constants"] = con;
  j["functions"] = fun;
  return j;
}

BValuedStructure bvstructure_from_json(const Json& j, const std::string& at) {
  const BoolAlg alg = algebra_from_json(field(j, at, "algebra"), pointer_append(at, "algebra"));
  const Signature sig = signature_from_json(field(j, at, "signature"), pointer_append(at, "signature"));
  const std::string kind = text(field(j, at, "kind"), pointer_append(at, "kind"));
  if (kind == "bundle") {
    const std::string f_at = pointer_append(at, "fibers");
    const Json& fj = array(field(j, at, "fibers"), f_at);
    std::vector<Structure> fibers;
    for (std::size_t i = 0; i < fj.size(); ++i) fibers.push_back(structure_body_from_json(fj[i], sig, at_index(f_at, i)));
    const std::string e_at = pointer_append(at, "elements");
    const Json& ej = array(field(j, at, "elements"), e_at);
    std::vector<std::vector<int>> elements;
    for (std::size_t k = 0; k < ej.size(); ++k) {
      std::vector<int> tuple;
      for (std::size_t e = 0; e < array(ej[k], at_index(e_at, k)).size(); ++e) {
        tuple.push_back(small_int(ej[k][e], at_index(at_index(e_at, k), e), 0, 1 << 20));
      }
      elements.push_back(std::move(tuple));
    }
    return guarded(at, [&] { return make_bundle(alg, fibers, elements); });
  }
  if (kind != "abstract") throw FormatError(pointer_append(at, "kind"), "kind must be bundle or abstract");
  AbstractData data;
  data.size = small_int(field(j, at, "size"), pointer_append(at, "size"), 1, 4096);
  data.equality = elements_from_json(field(j, at, "equality"), alg, pointer_append(at, "equality"));
  auto tables = [&](std::string_view key, const std::vector<std::string>& names) {
    const std::string k_at = pointer_append(at, key);
    const Json& obj = object(field(j, at, key), k_at);
    check_keys(obj, k_at, std::set<std::string>(names.begin(), names.end()));
    std::vector<std::vector<Element>> out;
    for (const auto& name : names) out.push_back(elements_from_json(field(obj, k_at, name), alg, pointer_append(k_at, name)));
    return out;
  };
  std::vector<std::string> rel_names, fun_names;
  for (const auto& d : sig.relations()) rel_names.push_back(d.name);
  for (const auto& d : sig.functions()) fun_names.push_back(d.name);
  data.relations = tables("relations", rel_names);
  data.constants = tables("constants", sig.constants());
  data.functions = tables("functions", fun_names);
  return guarded(at, [&] { return make_abstract(alg, sig, std::move(data)); });
}

Json to_json(const Distribution& a) {
  Json values = Json::object();
  for (Subset s = 0; s < a.values.size(); ++s) values[subset_key(s)] = to_json(a.values[s]);
  return Json{{"algebra", to_json(a.algebra)}, {"index", index_json(a.index_size)}, {"values", values}};
}

Distribution table_from_json(const Json& j, const std::string& at) {
  Distribution a;
  a.algebra = algebra_from_json(field(j, at, "algebra"), pointer_append(at, "algebra"));
  a.index_size = index_size_from_json(field(j, at, "index"), pointer_append(at, "index"));
  const std::string v_at = pointer_append(at, "values");
  const Json& values = object(field(j, at, "values"), v_at);
  const std::size_t count = std::size_t{1} << a.index_size;
  a.values.assign(count, a.algebra.zero());
  std::vector<bool> seen(count, false);
  for (const auto& [key, value] : values.items()) {
    const std::string k_at = pointer_append(v_at, key);
    const Subset s = subset_from_key(key, a.index_size, k_at);
    a.values[s] = element_from_json(value, a.algebra, k_at);
    seen[s] = true;
  }
  for (Subset s = 0; s < count; ++s) {
    if (!seen[s]) throw FormatError(pointer_append(v_at, subset_key(s)), "missing value");
  }
  return a;
}

Distribution distribution_from_json(const Json& j, const std::string& at) {
  Distribution a = table_from_json(j, at);
  const std::string v_at = pointer_append(at, "values");
  for (Subset s = 0; s < a.values.size(); ++s) {
    const std::string k_at = pointer_append(v_at, subset_key(s));
    if (s == 0 && !a[s].is_one()) throw FormatError(k_at, "value at the empty set must be 1");
    if (a[s].is_zero()) throw FormatError(k_at, "value must be nonzero");
    for (int i : subset_members(s)) {
      if (!leq(a[s], a[s & ~(Subset{1} << i)])) {
        throw FormatError(k_at, "not monotone: exceeds the value at {" + subset_key(s & ~(Subset{1} << i)) + "}");
      }
    }
  }
  return a;
}

Json to_json(const PrincipalFilter& filter) {
  return Json{{"algebra", to_json(BoolAlg(filter.atom_count()))}, {"generator", to_json(filter.generator())}};
}

PrincipalFilter filter_from_json(const Json& j, const std::string& at) {
  const BoolAlg alg = algebra_from_json(field(j, at, "algebra"), pointer_append(at, "algebra"));
  const std::string g_at = pointer_append(at, "generator");
  const Element g = element_from_json(field(j, at, "generator"), alg, g_at);
  return guarded(g_at, [&] { return PrincipalFilter(g); });
}

Json to_json(const AlgebraHom& hom) {
  Json map = Json::object();
  for (std::size_t y = 0; y < hom.atom_map().size(); ++y) map[std::to_string(y)] = hom.atom_map()[y];
  return Json{{"source", to_json(hom.source())}, {"target", to_json(hom.target())}, {"atom_map", map}};
}

AlgebraHom hom_from_json(const Json& j, const std::string& at) {
  const BoolAlg source = algebra_from_json(field(j, at, "source"), pointer_append(at, "source"));
  const BoolAlg target = algebra_from_json(field(j, at, "target"), pointer_append(at, "target"));
  const std::string m_at = pointer_append(at, "atom_map");
  const Json& map = object(field(j, at, "atom_map"), m_at);
  std::vector<int> g(static_cast<std::size_t>(target.atom_count()), -1);
  for (const auto& [key, value] : map.items()) {
    const std::string k_at = pointer_append(m_at, key);
    int y = -1;
    try {
      std::size_t used = 0;
      y = std::stoi(key, &used);
      if (used != key.size() || std::to_string(y) != key) y = -1;
    } catch (const std::exception&) {
      y = -1;
    }
    if (y < 0 || y >= target.atom_count()) throw FormatError(k_at, "key is not a target atom");
    g[static_cast<std::size_t>(y)] = small_int(value, k_at, 0, source.atom_count() - 1);
  }
  for (std::size_t y = 0; y < g.size(); ++y) {
    if (g[y] < 0) throw FormatError(pointer_append(m_at, std::to_string(y)), "target atom not mapped");
  }
  return guarded(m_at, [&] { return hom_from_atom_map(source, target, g, false); });
}

Json to_json(const IndexedAntichain& antichain, const BoolAlg& algebra) {
  Json members = Json::object();
  for (const auto& [s, e] : antichain.members) members[subset_key(s)] = to_json(e);
  return Json{{"algebra", to_json(algebra)}, {"index", index_json(antichain.index_size)}, {"members", members}};
}

IndexedAntichain antichain_from_json(const Json& j, const std::string& at) {
  const BoolAlg alg = algebra_from_json(field(j, at, "algebra"), pointer_append(at, "algebra"));
  IndexedAntichain out;
  out.index_size = index_size_from_json(field(j, at, "index"), pointer_append(at, "index"));
  const std::string m_at = pointer_append(at, "members");
  for (const auto& [key, value] : object(field(j, at, "members"), m_at).items()) {
    const std::string k_at = pointer_append(m_at, key);
    out.members.emplace(subset_from_key(key, out.index_size, k_at), element_from_json(value, alg, k_at));
  }
  return out;
}

Json to_json(const Theory& theory) { return formulas_json(theory); }

Theory theory_from_json(const Json& j, const Signature* signature, const std::string& at) {
  return formulas_from_json(j, signature, at);
}

Json to_json(const FormulaSequence& seq) {
  return Json{{"signature", to_json(seq.signature)}, {"variables", seq.variables}, {"formulas", formulas_json(seq.formulas)}};
}

FormulaSequence sequence_from_json(const Json& j, const std::string& at) {
  FormulaSequence seq;
  seq.signature = signature_from_json(field(j, at, "signature"), pointer_append(at, "signature"));
  seq.variables = strings_from_json(field(j, at, "variables"), pointer_append(at, "variables"));
  seq.formulas = formulas_from_json(field(j, at, "formulas"), &seq.signature, pointer_append(at, "formulas"));
  return seq;
}

Json to_json(const PartialType& type) {
  return Json{{"host", to_json(type.host)}, {"variables", type.variables}, {"formulas", formulas_json(type.formulas)}};
}

PartialType type_from_json(const Json& j, const std::string& at) {
  BValuedStructure host = bvstructure_from_json(field(j, at, "host"), pointer_append(at, "host"));
  auto variables = strings_from_json(field(j, at, "variables"), pointer_append(at, "variables"));
  auto formulas = formulas_from_json(field(j, at, "formulas"), &host.signature(), pointer_append(at, "formulas"));
  return PartialType{std::move(host), std::move(variables), std::move(formulas)};
}

Json to_json(const ValueConstraint& vc) {
  return Json{{"algebra", to_json(vc.algebra)},     {"signature", to_json(vc.signature)},
              {"parameters", vc.parameters},        {"formulas", formulas_json(vc.formulas)},
              {"lower", elements_json(vc.lower)},   {"upper", elements_json(vc.upper)}};
}

ValueConstraint constraint_from_json(const Json& j, const std::string& at) {
  ValueConstraint vc;
  vc.algebra = algebra_from_json(field(j, at, "algebra"), pointer_append(at, "algebra"));
  vc.signature = signature_from_json(field(j, at, "signature"), pointer_append(at, "signature"));
  vc.parameters = small_int(field(j, at, "parameters"), pointer_append(at, "parameters"), 0, 16);
  vc.formulas = formulas_from_json(field(j, at, "formulas"), &vc.signature, pointer_append(at, "formulas"));
  vc.lower = elements_from_json(field(j, at, "lower"), vc.algebra, pointer_append(at, "lower"));
  vc.upper = elements_from_json(field(j, at, "upper"), vc.algebra, pointer_append(at, "upper"));
  if (vc.lower.size() != vc.formulas.size()) throw FormatError(pointer_append(at, "lower"), "one bound per formula");
  if (vc.upper.size() != vc.formulas.size()) throw FormatError(pointer_append(at, "upper"), "one bound per formula");
  return vc;
}

Json to_json(const FinderTask& task) {
  return Json{{"signature", to_json(task.signature)}, {"axioms", formulas_json(task.axioms)},
              {"positive", formulas_json(task.positive)}, {"negative", formulas_json(task.negative)},
              {"params", task.params}, {"bound", task.bound}, {"budget", task.node_budget}};
}

FinderTask task_from_json(const Json& j, const std::string& at) {
  FinderTask task;
  task.signature = signature_from_json(field(j, at, "signature"), pointer_append(at, "signature"));
  auto list = [&](std::string_view key) {
    const Json* f = optional_field(j, at, key);
    return f ? formulas_from_json(*f, &task.signature, pointer_append(at, key)) : std::vector<Formula>{};
  };
  task.axioms = list("axioms");
  task.positive = list("positive");
  task.negative = list("negative");
  if (const Json* p = optional_field(j, at, "params")) task.params = small_int(*p, pointer_append(at, "params"), 0, 16);
  task.bound = small_int(field(j, at, "bound"), pointer_append(at, "bound"), 1, 16);
  if (const Json* b = optional_field(j, at, "budget")) {
    if (!b->is_number_unsigned()) throw FormatError(pointer_append(at, "budget"), "expected a nonnegative integer");
    task.node_budget = b->get<std::uint64_t>();
  }
  return task;
}

Json to_json(const GoodPairState& state) {
  Json reserve = Json::array();
  for (const auto& a : state.reserve) reserve.push_back(elements_json(a));
  return Json{{"source", to_json(state.source)},
              {"target", to_json(state.target)},
              {"designated", elements_json(state.designated)},
              {"designated_image", elements_json(state.designated_image)},
              {"reserve", reserve},
              {"filter", to_json(state.filter.generator())}};
}

GoodPairState state_from_json(const Json& j, const std::string& at) {
  GoodPairState s;
  s.source = algebra_from_json(field(j, at, "source"), pointer_append(at, "source"));
  s.target = algebra_from_json(field(j, at, "target"), pointer_append(at, "target"));
  s.designated = elements_from_json(field(j, at, "designated"), s.source, pointer_append(at, "designated"));
  s.designated_image = elements_from_json(field(j, at, "designated_image"), s.target, pointer_append(at, "designated_image"));
  const std::string r_at = pointer_append(at, "reserve");
  const Json& reserve = array(field(j, at, "reserve"), r_at);
  for (std::size_t i = 0; i < reserve.size(); ++i) s.reserve.push_back(elements_from_json(reserve[i], s.source, at_index(r_at, i)));
  const std::string f_at = pointer_append(at, "filter");
  const Element g = element_from_json(field(j, at, "filter"), s.source, f_at);
  s.filter = guarded(f_at, [&] { return PrincipalFilter(g); });
  guarded(at, [&] { validate_state(s); return 0; });
  return s;
}

}  // namespace bvm::io

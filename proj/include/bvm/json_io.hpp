#pragma once

// Canonical JSON for every value type. Readers take the JSON pointer of the
// value they parse and throw FormatError pointing at the offending field;
// writers emit the canonical form, so store(load(x)) == x byte-wise whenever x
// is canonical.
//
//   algebra       {"atoms": n, "labels": [...]}          labels only when set
//   element       sorted array of atom indices
//   signature     {"relations": [{"name", "arity"}], "functions": [...], "constants": [...]}
//   structure     {"signature", "size", "relations": {R: [true tuples]},
//                  "functions": {f: table}, "constants": {c: value}}
//   bundle        {"kind": "bundle", "algebra", "signature", "fibers": [structure bodies],
//                  "elements": [[value per atom]]}
//   abstract      {"kind": "abstract", "algebra", "signature", "size", "equality": [...],
//                  "relations": {R: [...]}, "constants": {c: [...]}, "functions": {f: [...]}}
//   distribution  {"algebra", "index": [0..m-1], "values": {"": el, "0": el, "0,1": el}}
//   filter        {"algebra", "generator": el}
//   hom           {"source", "target", "atom_map": {target atom: source atom}}
//   antichain     {"algebra", "index": [...], "members": {"0,1": el}}

#include <string>
#include <string_view>

#include "bvm/boolean_algebra.hpp"
#include "bvm/bvalued.hpp"
#include "bvm/distributions.hpp"
#include "bvm/logic.hpp"
#include "bvm/model_finder.hpp"
#include "bvm/structure.hpp"
#include "bvm/transfer.hpp"
#include "json.hpp"

namespace bvm::io {

using Json = nlohmann::json;

/// Two-space indented dump with sorted keys and a trailing newline.
std::string dump(const Json& j);
/// Throws FormatError at "" when the text is not JSON.
Json parse_text(std::string_view text);
Json load_file(const std::string& path);
void store_file(const std::string& path, const Json& j);

/// `base` extended by one reference token, escaped per RFC 6901.
std::string pointer_append(const std::string& base, std::string_view token);

Json to_json(const BoolAlg& algebra);
BoolAlg algebra_from_json(const Json& j, const std::string& at = "");

Json to_json(const Element& element);
Element element_from_json(const Json& j, const BoolAlg& algebra, const std::string& at = "");

Json to_json(const Signature& signature);
Signature signature_from_json(const Json& j, const std::string& at = "");

Json to_json(const Formula& formula);
Formula formula_from_json(const Json& j, const Signature* signature, const std::string& at = "");
/// Tree form for tooling: {"kind", "name", "terms", "children"}.
Json formula_ast(const Formula& formula);

Json to_json(const Structure& structure);
Structure structure_from_json(const Json& j, const std::string& at = "");

Json to_json(const BValuedStructure& m);
BValuedStructure bvstructure_from_json(const Json& j, const std::string& at = "");

Json to_json(const Distribution& a);
/// Rejects tables that are not distributions, pointing at the first key (in
/// increasing mask order) that breaks nonzero values, 1 at ∅ or monotonicity.
Distribution distribution_from_json(const Json& j, const std::string& at = "");
/// Same shape without the distribution axioms (refinement tables, fix-ups).
Distribution table_from_json(const Json& j, const std::string& at = "");

Json to_json(const PrincipalFilter& filter);
PrincipalFilter filter_from_json(const Json& j, const std::string& at = "");

Json to_json(const AlgebraHom& hom);
AlgebraHom hom_from_json(const Json& j, const std::string& at = "");

Json to_json(const IndexedAntichain& antichain, const BoolAlg& algebra);
IndexedAntichain antichain_from_json(const Json& j, const std::string& at = "");

Json to_json(const Theory& theory);
Theory theory_from_json(const Json& j, const Signature* signature, const std::string& at = "");

/// {"signature", "variables", "formulas"}; extra fields are ignored.
Json to_json(const FormulaSequence& seq);
FormulaSequence sequence_from_json(const Json& j, const std::string& at = "");

/// {"host", "variables", "formulas"}
Json to_json(const PartialType& type);
PartialType type_from_json(const Json& j, const std::string& at = "");

/// {"algebra", "signature", "parameters", "formulas", "lower", "upper"}
Json to_json(const ValueConstraint& vc);
ValueConstraint constraint_from_json(const Json& j, const std::string& at = "");

/// {"signature", "axioms", "positive", "negative", "params", "bound", "budget"}
Json to_json(const FinderTask& task);
FinderTask task_from_json(const Json& j, const std::string& at = "");

/// {"source", "target", "designated", "designated_image", "reserve", "filter"}
Json to_json(const GoodPairState& state);
GoodPairState state_from_json(const Json& j, const std::string& at = "");

}  // namespace bvm::io

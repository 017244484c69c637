#include "polyforge/candidate.hpp"

namespace polyforge {

std::string_view edit_kind_name(EditKind kind) {
  switch (kind) {
    case EditKind::kAddSubstituent: return "add_substituent";
    case EditKind::kRemoveSubstituent: return "remove_substituent";
    case EditKind::kReplaceSubstituent: return "replace_substituent";
    case EditKind::kSwapLinkage: return "swap_linkage";
  }
  return "add_substituent";
}

EditKind edit_kind_from_name(std::string_view name) {
  for (auto k : {EditKind::kAddSubstituent, EditKind::kRemoveSubstituent, EditKind::kReplaceSubstituent,
                 EditKind::kSwapLinkage}) {
    if (edit_kind_name(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidEdit, "unknown edit kind '" + std::string(name) + "'");
}

nlohmann::json to_json(const Edit& edit) {
  nlohmann::json j{{"kind", edit_kind_name(edit.kind)}, {"site", edit.site}};
  if (edit.kind != EditKind::kRemoveSubstituent) j["fragment"] = edit.fragment;
  return j;
}

Edit edit_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string() || !j.contains("site") ||
      !j["site"].is_number_integer()) {
    throw Error(ErrorCode::kInvalidEdit, "edit needs string 'kind' and integer 'site'");
  }
  Edit e;
  e.kind = edit_kind_from_name(j["kind"].get<std::string>());
  e.site = j["site"].get<int>();
  if (j.contains("fragment")) {
    if (!j["fragment"].is_string()) throw Error(ErrorCode::kInvalidEdit, "'fragment' must be a string");
    e.fragment = j["fragment"].get<std::string>();
  }
  if (e.kind != EditKind::kRemoveSubstituent && e.fragment.empty()) {
    throw Error(ErrorCode::kInvalidEdit, std::string(edit_kind_name(e.kind)) + " needs a fragment");
  }
  return e;
}

nlohmann::json to_json(const ProvenanceStep& step) {
  nlohmann::json j{{"action", step.action}};
  if (step.action == "template") {
    j["template"] = step.template_id;
    j["reactants"] = step.reactants;
  } else {
    j["input"] = step.input;
    if (step.edit) j["edit"] = to_json(*step.edit);
  }
  return j;
}

nlohmann::json to_json(const CandidateRecord& record) {
  nlohmann::json props = nlohmann::json::object();
  for (const auto& [id, v] : record.properties) props[id] = v;
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : record.provenance) steps.push_back(to_json(s));
  nlohmann::json j{{"cru", record.cru}, {"properties", std::move(props)}, {"provenance", std::move(steps)}};
  j["sa"] = record.sa ? nlohmann::json(*record.sa) : nlohmann::json(nullptr);
  j["sc"] = record.sc ? nlohmann::json(*record.sc) : nlohmann::json(nullptr);
  j["objective"] = record.objective ? nlohmann::json(*record.objective) : nlohmann::json(nullptr);
  j["out_of_range"] = out_of_range(record.properties);
  return j;
}

}  // namespace polyforge

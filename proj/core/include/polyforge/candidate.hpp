#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyforge/property_model.hpp"

namespace polyforge {

enum class EditKind { kAddSubstituent, kRemoveSubstituent, kReplaceSubstituent, kSwapLinkage };

std::string_view edit_kind_name(EditKind kind);
EditKind edit_kind_from_name(std::string_view name);

/// A local structural change at one atom of a CRU. `fragment` is a
/// substituent from the library (add/replace) or an element symbol
/// (swap_linkage); remove ignores it.
struct Edit {
  EditKind kind = EditKind::kAddSubstituent;
  int site = 0;
  std::string fragment;
  bool operator==(const Edit&) const = default;
};

nlohmann::json to_json(const Edit& edit);
Edit edit_from_json(const nlohmann::json& j);

struct ProvenanceStep {
  std::string action;                  // "template" or "edit"
  std::string template_id;             // template steps
  std::vector<std::string> reactants;  // template steps, canonical SMILES
  std::optional<Edit> edit;            // edit steps
  std::string input;                   // edit steps: CRU the edit applied to
};

nlohmann::json to_json(const ProvenanceStep& step);

struct CandidateRecord {
  std::string cru;  // canonical
  PropertyVector properties;
  std::optional<double> sa;
  std::optional<double> sc;
  std::vector<ProvenanceStep> provenance;
  std::optional<double> objective;
};

nlohmann::json to_json(const CandidateRecord& record);

}  // namespace polyforge

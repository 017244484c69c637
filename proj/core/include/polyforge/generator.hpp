#pragma once

// Reactant-bag enumeration: pairs of bag molecules are joined through
// fixed step-growth templates into two-star repeat units.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polyforge/candidate.hpp"
#include "polyforge/psmiles.hpp"

namespace polyforge {

/// Functional groups recognised on molecules (no stars).
///   OH    hydroxyl on a carbon that carries no C=O (alcohol or phenol)
///   COOH  carboxylic acid; atoms = {C, O(carbonyl), O(hydroxyl)}
///   NH2   primary amine on a non-carbonyl carbon
///   NCO   isocyanate; atoms = {N, C, O}
enum class GroupId { kHydroxyl, kCarboxyl, kAmine, kIsocyanate };

std::string_view group_id_name(GroupId id);
GroupId group_id_from_name(std::string_view name);

struct GroupMatch {
  GroupId id;
  std::vector<int> atoms;  // anchor atom first
  bool operator==(const GroupMatch&) const = default;
};

/// All matches, sorted by lowest atom index.
std::vector<GroupMatch> find_groups(const PolymerGraph& molecule);

struct Reactant {
  std::string smiles;  // as written in the bag; atom order matters for site choice
  PolymerGraph graph;
  std::vector<GroupMatch> groups;
  std::string source_tag;

  /// Matches of one group id, lowest atom index first.
  std::vector<GroupMatch> matches(GroupId id) const;
};

/// Parses a molecule and detects its groups. Throws ParseError, or
/// Error(kInvalidGraph) for stars or invalid chemistry.
Reactant make_reactant(std::string_view smiles, std::string source_tag = {});

/// Reads bag JSONL (`{smiles, groups:[{id, atoms}], source_tag}`). Every
/// annotated group must be a detected match; mismatches throw
/// Error(kSchemaMismatch) naming the line.
std::vector<Reactant> load_reactant_bag(const std::filesystem::path& path);
std::vector<Reactant> parse_reactant_bag(std::string_view jsonl);
nlohmann::json to_json(const Reactant& reactant);

struct ReactionTemplate {
  std::string id;
  std::array<GroupId, 2> required_groups;
  std::string byproduct_note;
};

/// polyester, polyamide, polyether, polyurethane.
std::span<const ReactionTemplate> template_library();
/// Throws Error(kInvalidArgument) for unknown ids.
const ReactionTemplate& find_template(std::string_view id);

/// Joins the first (lowest-index) group occurrence of `a` to that of `b`;
/// the second occurrences become the star endpoints. Throws
/// Error(kGroupNotFound) when either reactant has fewer than two
/// occurrences of its group.
PolymerGraph apply_template(const Reactant& a, const Reactant& b, const ReactionTemplate& t);

/// Every applicable (template, a, b) triple with a != b, shuffled by
/// `seed`, applied in that order and deduplicated by canonical CRU until
/// `limit` records exist. Throws Error(kNoApplicablePairs).
std::vector<CandidateRecord> enumerate_candidates(std::span<const Reactant> bag,
                                                  std::span<const ReactionTemplate> templates, int limit,
                                                  std::uint64_t seed);

/// Re-applies a record's template step; returns the canonical CRU.
std::string replay_template(const CandidateRecord& record, std::span<const ReactionTemplate> templates);

}  // namespace polyforge

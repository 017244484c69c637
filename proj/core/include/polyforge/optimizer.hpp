#pragma once

// Property-targeted search: scalarized objectives, local structural edits,
// annealing over edits seeded by enumeration, and the conservative
// single-edit check used by the closed refinement loop.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyforge/candidate.hpp"
#include "polyforge/generator.hpp"
#include "polyforge/property_model.hpp"
#include "polyforge/synth_score.hpp"

namespace polyforge {

struct Objective {
  std::string property_id;
  std::optional<double> target;                   // exact target, or
  std::optional<std::pair<double, double>> range;  // [lo, hi]
  double weight = 1.0;
};

enum class BoundKind { kAtMost, kAtLeast };

struct Constraint {
  std::string property_id;
  BoundKind kind = BoundKind::kAtMost;
  double bound = 0;
};

struct TargetSpec {
  std::vector<Objective> objectives;
  std::vector<Constraint> constraints;
  double sa_gate = 10.0;
  int budget = 2000;      // predictor evaluations spent on edits
  std::uint64_t seed = 42;
  int top_k = 10;
  int seed_limit = 200;   // enumerated seeds
};

constexpr double kConstraintPenalty = 100.0;

/// Throws Error(kInvalidArgument) for an invalid spec, kUnknownProperty
/// for unregistered ids.
void check_spec(const TargetSpec& spec);
TargetSpec target_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TargetSpec& spec);
/// JSON Schema of `target_spec_from_json`'s input.
const nlohmann::json& target_spec_schema();

/// Σ w·dev² + P·Σ violation². Throws Error(kMissingProperty).
double scalarize(const PropertyVector& props, const TargetSpec& spec);
/// Human-readable violated constraints, empty when feasible.
std::vector<std::string> constraint_violations(const PropertyVector& props, const TargetSpec& spec);

// ---------------------------------------------------------------- edits

/// The 16 substituents; the first atom of each attaches.
std::span<const std::string> substituent_library();
/// Elements allowed as backbone linkage atoms.
std::span<const std::string> linkage_elements();

/// Applies an edit. Throws Error(kInvalidEdit) when the edit does not fit
/// the graph (site out of range, star site, nothing to remove, unknown
/// fragment) and Error(kInvalidGraph) when the result breaks valence or
/// aromaticity rules.
PolymerGraph apply_edit(const PolymerGraph& cru, const Edit& edit);

/// Every syntactically applicable edit on `cru`, in a fixed order. Some
/// may still fail chemistry checks in apply_edit.
std::vector<Edit> candidate_edits(const PolymerGraph& cru);

// ----------------------------------------------------------- evaluation

/// Prediction context shared by the search and the refinement loop.
struct Scorer {
  const Predictor& predictor;
  const FragmentScoreTable& sa_table;
  const ScScoreModel* sc_model = nullptr;

  /// Fills properties, sa, sc (if a model is set) and objective.
  void score(CandidateRecord& record, const PolymerGraph& graph, const TargetSpec& spec) const;
};

// ------------------------------------------------------------- optimize

enum class OptimizeStatus { kComplete, kBudgetExhausted };
std::string_view optimize_status_name(OptimizeStatus status);

struct OptimizeResult {
  std::vector<CandidateRecord> ranked;  // ascending objective, canonical tie-break
  OptimizeStatus status = OptimizeStatus::kComplete;
  bool best_effort = false;             // no evaluated candidate met every constraint
  std::vector<std::vector<std::string>> violations;  // parallel to `ranked`
  int evaluations = 0;                  // edit evaluations spent
  int seeds = 0;                        // seeds passing the SA gate
  bool exhaustive = false;
};

nlohmann::json to_json(const OptimizeResult& result);

/// Number of single-edit proposals around the gated seeds; a budget at
/// least this large makes `optimize` sweep them exhaustively.
int exhaustive_size(const TargetSpec& spec, std::span<const Reactant> bag,
                    std::span<const ReactionTemplate> templates, const Scorer& scorer);

/// Enumerate seeds, drop those above the SA gate, then either sweep every
/// single edit of every seed (budget >= exhaustive_size) or anneal over
/// edits with T0 = objective spread of the seeds and ratio 0.95. Throws
/// Error(kNoFeasibleCandidate) when no seed passes the gate.
OptimizeResult optimize(const TargetSpec& spec, std::span<const Reactant> bag,
                        std::span<const ReactionTemplate> templates, const Scorer& scorer, int threads = 0);

// ----------------------------------------------------------- refinement

enum class Verdict { kAccepted, kRejectedWorse, kRejectedInvalid, kRejectedGate };
std::string_view verdict_name(Verdict verdict);

struct RefinementDecision {
  Verdict verdict = Verdict::kRejectedInvalid;
  PropertyVector before;
  std::optional<PropertyVector> after;
  double objective_before = 0;
  std::optional<double> objective_after;
  double objective_delta = 0;  // after - before; 0 when no prediction was made
  std::optional<double> sa_after;
  std::string result_cru;      // canonical, when the edit applied
  std::string flag_note;
};

nlohmann::json to_json(const RefinementDecision& decision);

/// Accepts iff the edited CRU parses, passes the SA gate and strictly
/// lowers the scalarized objective. Never throws for edit problems.
RefinementDecision refine_with_edit(const PolymerGraph& cru, const Edit& edit, const TargetSpec& spec,
                                    const Scorer& scorer);

}  // namespace polyforge

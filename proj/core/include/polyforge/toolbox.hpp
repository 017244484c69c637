#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyforge/generator.hpp"
#include "polyforge/polymer_db.hpp"
#include "polyforge/property_model.hpp"
#include "polyforge/psmiles.hpp"
#include "polyforge/synth_score.hpp"

namespace polyforge {

/// One callable capability. The same payloads back the CLI subcommands
/// and the tool server's `tools/call`.
struct ToolDescriptor {
  std::string name;
  std::string description;
  nlohmann::json input_schema;
  bool requires_confirmation = false;
};

/// The eight tools, in listing order.
std::span<const ToolDescriptor> tool_descriptors();
/// Null when unknown.
const ToolDescriptor* find_tool(std::string_view name);

nlohmann::json to_json(const ValidationReport& report);

/// Where bundled data lives. `from_environment` honours POLYFORGE_DATA_DIR
/// and POLYFORGE_MODELS_DIR, falling back to the build-time locations.
struct ToolboxPaths {
  std::filesystem::path data_dir;
  std::filesystem::path models_dir;
  std::optional<std::filesystem::path> db_path;   // default: data_dir/fixture_labeled.csv
  std::optional<std::filesystem::path> bag_path;  // default: data_dir/reactant_bag.jsonl

  static ToolboxPaths from_environment();
};

/// Loaded scoring tables, heads, reactant bag and database. Immutable
/// after `load`; `call` is safe to use from several threads.
class Toolbox {
 public:
  static Toolbox load(const ToolboxPaths& paths);

  /// Validates `arguments` against the tool schema, runs the tool and
  /// returns its JSON payload. Throws Error(kUnknownTool), SchemaViolation
  /// or the downstream module's Error.
  nlohmann::json call(std::string_view name, const nlohmann::json& arguments) const;

  const CruDatabase& database() const { return *db_; }
  std::span<const Reactant> bag() const { return bag_; }
  const FragmentScoreTable& sa_table() const { return *sa_table_; }
  const ScScoreModel& sc_model() const { return *sc_model_; }
  /// "single" serves each property from its own head, "multi" from the
  /// shared head.
  const Predictor& predictor(std::string_view head) const;

 private:
  nlohmann::json validate_polymer(const nlohmann::json& args) const;
  nlohmann::json predict_properties(const nlohmann::json& args) const;
  nlohmann::json generate_polymers(const nlohmann::json& args) const;
  nlohmann::json optimize_single_property(const nlohmann::json& args) const;
  nlohmann::json optimize_multi_property(const nlohmann::json& args) const;
  nlohmann::json refine_structure(const nlohmann::json& args) const;
  nlohmann::json score_synthesizability(const nlohmann::json& args) const;
  nlohmann::json compute_similarity(const nlohmann::json& args) const;

  std::shared_ptr<const FragmentScoreTable> sa_table_;
  std::shared_ptr<const ScScoreModel> sc_model_;
  std::shared_ptr<const HeadPredictor> single_;
  std::shared_ptr<const HeadPredictor> multi_;
  std::vector<Reactant> bag_;
  std::shared_ptr<const CruDatabase> db_;
};

/// Registry units for every id in `values`.
nlohmann::json units_json(const PropertyVector& values);

/// Database statistics plus the corpus hash; shared by `db stats` and the
/// server's stats resource.
nlohmann::json database_stats_json(const CruDatabase& db);

/// "easy" (SA <= 3), "hard" (SA > 6) or "moderate".
std::string_view sa_band(double sa);

}  // namespace polyforge

#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyforge/features.hpp"
#include "polyforge/psmiles.hpp"

namespace polyforge {

struct PropertySpec {
  std::string id;
  std::string display_name;
  std::string units;
  double lo;
  double hi;
};

/// PE_I, Egb, Eea, EPS, OPV and logP, in that order.
std::span<const PropertySpec> property_registry();
/// Throws Error(kUnknownProperty).
const PropertySpec& property_spec(std::string_view id);
bool is_registered(std::string_view id);
/// The five landscape-labelled properties.
std::vector<std::string> target_property_ids();

using PropertyVector = std::map<std::string, double, std::less<>>;

/// Ids whose value lies outside the registry's plausible range.
std::vector<std::string> out_of_range(const PropertyVector& values);

/// Linear-scale reading of a log-scale property (PE_I: 10^v in S/cm);
/// nothing for properties already stored on a linear scale.
struct DisplayValue {
  double value;
  std::string units;
};
std::optional<DisplayValue> display_value(std::string_view id, double value);

/// Reference landscape: each target property is affine in the dense
/// descriptors (see `landscape_coefficients`).
struct LandscapeRow {
  std::string_view id;
  double intercept;
  std::array<double, kDenseFeatureCount> weights;  // kDenseFeatureNames order
};
std::span<const LandscapeRow> landscape_coefficients();
PropertyVector reference_landscape(const PolymerGraph& graph);
PropertyVector reference_landscape(const DenseDescriptors& d);

// ------------------------------------------------------------- datasets

struct LabeledRow {
  std::string smiles;  // canonical
  PolymerGraph graph;
  PropertyVector labels;
};

struct Dataset {
  std::vector<LabeledRow> rows;
  int skipped = 0;  // unparseable SMILES
};

/// CSV with a `smiles` column plus any registered property columns; empty
/// cells are missing labels. Throws kSchemaMismatch without a smiles column.
Dataset load_dataset_csv(const std::string& path);
/// JSONL rows `{"smiles": ..., "<id>": value, ...}`.
Dataset load_dataset_jsonl(const std::string& path);
/// Dispatches on the extension (.jsonl / anything else as CSV).
Dataset load_dataset(const std::string& path);

/// Order-independent FNV hash of canonical SMILES plus labels, as hex.
std::string dataset_hash(std::span<const LabeledRow> rows);

// ---------------------------------------------------------- regression

enum class HeadKind { kSingle, kMulti };

struct RegressionHead {
  HeadKind kind = HeadKind::kSingle;
  std::vector<std::string> property_ids;
  std::vector<std::vector<double>> weights;  // one row per property, dim + 9 wide
  std::vector<double> bias;
  FeaturizerParams params;
  double ridge_lambda = 0;
  std::string training_fingerprint;
  int training_rows = 0;
  std::vector<double> training_loss;  // mean squared error per property
};

constexpr double kDefaultRidgeLambda = 1e-2;
/// Penalty on the dense descriptor block relative to hashed fragments.
constexpr double kDensePenaltyScale = 1e-4;

/// Closed-form ridge on standardized features with an unpenalized
/// intercept; weights are mapped back to raw feature units.
RegressionHead train_head(std::span<const LabeledRow> data, const std::vector<std::string>& ids,
                          double ridge_lambda = kDefaultRidgeLambda, const FeaturizerParams& params = {});

/// Zero weights, given bias.
RegressionHead constant_head(const PropertyVector& values, const FeaturizerParams& params = {});

PropertyVector predict(const PolymerGraph& graph, const RegressionHead& head);
PropertyVector predict_features(std::span<const double> features, const RegressionHead& head);

nlohmann::json to_json(const RegressionHead& head);
RegressionHead head_from_json(const nlohmann::json& j);
RegressionHead load_head(const std::string& path);
void save_head(const RegressionHead& head, const std::string& path);

/// Anything that maps a graph to property values.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::vector<std::string> property_ids() const = 0;
  virtual PropertyVector predict(const PolymerGraph& graph) const = 0;
};

/// Predictor backed by one or more heads; later heads never override ids
/// already served by earlier ones.
class HeadPredictor : public Predictor {
 public:
  explicit HeadPredictor(std::vector<RegressionHead> heads);
  std::vector<std::string> property_ids() const override;
  PropertyVector predict(const PolymerGraph& graph) const override;
  const std::vector<RegressionHead>& heads() const { return heads_; }

 private:
  std::vector<RegressionHead> heads_;
};

/// Exact reference landscape.
class LandscapePredictor : public Predictor {
 public:
  std::vector<std::string> property_ids() const override { return target_property_ids(); }
  PropertyVector predict(const PolymerGraph& graph) const override { return reference_landscape(graph); }
};

}  // namespace polyforge

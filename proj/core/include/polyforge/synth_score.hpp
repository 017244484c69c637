#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyforge/features.hpp"
#include "polyforge/psmiles.hpp"

namespace polyforge {

/// Affine map from the raw Ertl sum to the 1..10 scale.
struct SaScale {
  double slope = -9.0 / 6.5;
  double intercept = 11.0 - 9.0 * 5.0 / 6.5;
};

struct FragmentScoreTable {
  int radius = 2;
  int corpus_size = 0;
  double reference_frequency = 0;  // frequency of the 80th-percentile fragment
  double percentile_floor = 0;     // contribution of unseen fragments
  SaScale scale;
  std::map<std::uint64_t, double> contributions;

  double contribution(std::uint64_t fragment) const {
    auto it = contributions.find(fragment);
    return it == contributions.end() ? percentile_floor : it->second;
  }
};

/// Fragment occurrence counts over radius-2 environments of the star-capped
/// graphs; contribution = log10(count / reference). Unseen fragments score
/// one below the rarest seen fragment.
FragmentScoreTable build_fragment_table(std::span<const PolymerGraph> corpus);

struct RingComplexity {
  int spiro_atoms = 0;
  int bridgehead_atoms = 0;
  int macrocycles = 0;  // rings larger than 8
};

RingComplexity ring_complexity(const PolymerGraph& graph);

struct SaBreakdown {
  double fragment_score = 0;
  double size_penalty = 0;
  double spiro_penalty = 0;
  double bridge_penalty = 0;
  double macrocycle_penalty = 0;
  double symmetry_correction = 0;
  double raw = 0;
  double score = 0;
};

/// Ertl synthetic accessibility without the stereo term. Stars are capped
/// with hydrogen before fragments are enumerated.
SaBreakdown sa_breakdown(const PolymerGraph& graph, const FragmentScoreTable& table);
double sa_score(const PolymerGraph& graph, const FragmentScoreTable& table);

/// Least-squares fit of the raw sum onto reference scores; returns the
/// table with `scale` replaced.
FragmentScoreTable fit_sa_scale(FragmentScoreTable table, std::span<const PolymerGraph> graphs,
                                std::span<const double> reference);

/// Linear surrogate for the synthetic complexity score, clamped to [1, 5].
struct ScScoreModel {
  FeaturizerParams params;
  std::vector<double> weights;  // params.dim + kDenseFeatureCount
  double bias = 1.0;
};

ScScoreModel constant_sc_model(double bias, const FeaturizerParams& params = {});
double sc_raw(const PolymerGraph& graph, const ScScoreModel& model);
double sc_score(const PolymerGraph& graph, const ScScoreModel& model);
double sc_score_from_features(std::span<const double> features, const ScScoreModel& model);

/// Dense-block shape used for the bundled model: size, rings, heteroatoms
/// and aromatic content raise complexity.
std::array<double, kDenseFeatureCount> default_sc_shape();

/// Keeps `shape` on the dense block and solves for the bias so that the mean
/// clamped score over `graphs` equals `target_mean`.
ScScoreModel calibrate_sc_model(std::span<const PolymerGraph> graphs, double target_mean,
                                const std::array<double, kDenseFeatureCount>& shape = default_sc_shape(),
                                const FeaturizerParams& params = {});

nlohmann::json to_json(const FragmentScoreTable& table);
FragmentScoreTable fragment_table_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScScoreModel& model);
ScScoreModel sc_model_from_json(const nlohmann::json& j);

}  // namespace polyforge

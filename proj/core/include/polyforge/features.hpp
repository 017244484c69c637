#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "polyforge/psmiles.hpp"

namespace polyforge {

struct FeaturizerParams {
  int dim = 1024;    // hashed fragment block width
  int radius = 2;
  bool operator==(const FeaturizerParams&) const = default;
};

constexpr int kDenseFeatureCount = 9;

/// Names of the dense descriptor block, in feature-vector order.
constexpr std::array<std::string_view, kDenseFeatureCount> kDenseFeatureNames{
    "heavy_atoms", "rings", "frac_O", "frac_N", "frac_S", "frac_halogen",
    "ether_O", "aromatic_frac", "stars"};

struct DenseDescriptors {
  double heavy_atoms = 0;
  double rings = 0;
  double frac_o = 0;
  double frac_n = 0;
  double frac_s = 0;
  double frac_halogen = 0;
  double ether_o = 0;
  double aromatic_frac = 0;
  double stars = 0;

  std::array<double, kDenseFeatureCount> values() const {
    return {heavy_atoms, rings, frac_o, frac_n, frac_s, frac_halogen, ether_o, aromatic_frac, stars};
  }
};

/// Oxygens with exactly two single bonds, both to carbon. A star stands in
/// for the atom it links to in the next repeat unit: the partner of the
/// unit's other star when the unit has two, carbon otherwise.
int ether_oxygen_count(const PolymerGraph& graph);

DenseDescriptors dense_descriptors(const PolymerGraph& graph);

/// Hashed Morgan environment counts folded to `dim`, followed by the dense
/// block. Size is dim + 9.
std::vector<double> featurize(const PolymerGraph& graph, const FeaturizerParams& params = {});

}  // namespace polyforge

#include "polyforge/features.hpp"

#include "polyforge/fingerprint.hpp"

namespace polyforge {
namespace {

bool is_halogen(const std::string& e) { return e == "F" || e == "Cl" || e == "Br" || e == "I"; }

// Element a star continues into, per the rule in ether_oxygen_count.
std::string star_continuation(const PolymerGraph& g, int star) {
  for (const auto& unit : g.units()) {
    std::vector<int> stars;
    bool mine = false;
    for (int a : unit.atoms) {
      if (g.atom(a).is_star()) {
        stars.push_back(a);
        mine = mine || a == star;
      }
    }
    if (!mine) continue;
    if (stars.size() != 2) return "C";
    const int other = stars[0] == star ? stars[1] : stars[0];
    return g.atom(g.neighbors(other)[0].atom).element;
  }
  return "C";
}

}  // namespace

int ether_oxygen_count(const PolymerGraph& graph) {
  int count = 0;
  for (int i = 0; i < graph.atom_count(); ++i) {
    const AtomNode& a = graph.atom(i);
    if (a.element != "O" || a.aromatic || a.formal_charge != 0 || graph.degree(i) != 2) continue;
    bool ether = true;
    for (const auto& nb : graph.neighbors(i)) {
      const AtomNode& n = graph.atom(nb.atom);
      const std::string element = n.is_star() ? star_continuation(graph, nb.atom) : n.element;
      if (graph.bond(nb.bond).order != BondOrder::kSingle || element != "C") ether = false;
    }
    count += ether ? 1 : 0;
  }
  return count;
}

DenseDescriptors dense_descriptors(const PolymerGraph& graph) {
  require_valid(graph);
  DenseDescriptors d;
  int heavy = 0, o = 0, n = 0, s = 0, x = 0, arom = 0;
  for (const auto& a : graph.atoms()) {
    if (a.is_star() || a.element == "H") continue;
    ++heavy;
    o += a.element == "O";
    n += a.element == "N";
    s += a.element == "S";
    x += is_halogen(a.element);
    arom += a.aromatic;
  }
  d.heavy_atoms = heavy;
  d.rings = graph.ring_count();
  if (heavy > 0) {
    d.frac_o = static_cast<double>(o) / heavy;
    d.frac_n = static_cast<double>(n) / heavy;
    d.frac_s = static_cast<double>(s) / heavy;
    d.frac_halogen = static_cast<double>(x) / heavy;
    d.aromatic_frac = static_cast<double>(arom) / heavy;
  }
  d.ether_o = ether_oxygen_count(graph);
  d.stars = static_cast<double>(graph.star_indices().size());
  return d;
}

std::vector<double> featurize(const PolymerGraph& graph, const FeaturizerParams& params) {
  if (params.dim <= 0) throw Error(ErrorCode::kInvalidArgument, "featurizer dim must be positive");
  std::vector<double> out(static_cast<std::size_t>(params.dim + kDenseFeatureCount), 0.0);
  for (const auto& [hash, count] : morgan_environments(graph, params.radius)) {
    out[static_cast<std::size_t>(hash % static_cast<std::uint64_t>(params.dim))] += count;
  }
  const auto dense = dense_descriptors(graph).values();
  std::copy(dense.begin(), dense.end(), out.begin() + params.dim);
  return out;
}

}  // namespace polyforge

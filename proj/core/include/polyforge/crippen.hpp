#pragma once

#include <string>
#include <vector>

#include "polyforge/psmiles.hpp"

namespace polyforge {

struct CrippenResult {
  double logp = 0;
  /// Heavy-atom type labels ("C1", "N11", "OS", ...), one per atom of the
  /// star-capped graph.
  std::vector<std::string> atom_types;
  /// Atoms that matched no rule; they fall back to their element default.
  std::vector<int> untyped_atoms;
};

/// Wildman-Crippen logP with implicit hydrogens typed by their heavy atom.
/// Stars are replaced by hydrogen before typing.
CrippenResult crippen(const PolymerGraph& graph);
double crippen_logp(const PolymerGraph& graph);

}  // namespace polyforge

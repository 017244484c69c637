#include <set>

#include "polyforge/psmiles.hpp"

namespace polyforge {
namespace {

Diagnostic make(ErrorCode code, std::string message, std::optional<int> atom = std::nullopt) {
  return {std::string(code_name(code)), std::move(message), atom};
}

}  // namespace

ValidationReport validate(const PolymerGraph& graph, ValidationMode mode) {
  ValidationReport report;
  report.star_count = static_cast<int>(graph.star_indices().size());

  for (int i = 0; i < graph.atom_count(); ++i) {
    const AtomNode& a = graph.atom(i);
    const std::string where = "atom " + std::to_string(i) + " (" + a.element + ")";
    if (find_element(a.element) == nullptr) {
      report.errors.push_back(make(ErrorCode::kUnknownSymbol, where + ": unknown element", i));
      continue;
    }
    if (a.is_star() && graph.degree(i) != 1) {
      report.errors.push_back(make(ErrorCode::kStarDegree,
                                   where + ": star must have exactly one neighbor, has " +
                                       std::to_string(graph.degree(i)),
                                   i));
    }
    if (const auto cap = graph.max_valence(i)) {
      const int used = graph.bond_order_sum(i) + a.explicit_h.value_or(0);
      if (used > *cap) {
        report.errors.push_back(make(ErrorCode::kValenceViolation,
                                     where + ": valence " + std::to_string(used) + " exceeds maximum " +
                                         std::to_string(*cap),
                                     i));
      }
    }
    if (a.aromatic && !graph.atom_in_ring(i)) {
      report.errors.push_back(make(ErrorCode::kInvalidAromatic, where + ": aromatic atom outside a ring", i));
    }
  }
  for (int e = 0; e < graph.bond_count(); ++e) {
    const auto& b = graph.bond(e);
    if (b.order != BondOrder::kAromatic) continue;
    if (!graph.bond_in_ring(e) || !graph.atom(b.a).aromatic || !graph.atom(b.b).aromatic) {
      report.errors.push_back(make(ErrorCode::kInvalidAromatic,
                                   "aromatic bond " + std::to_string(b.a) + "-" + std::to_string(b.b) +
                                       " is not between ring aromatic atoms",
                                   b.a));
    }
  }

  // Units must be connected and must not share bonds.
  std::vector<int> unit_of(static_cast<std::size_t>(graph.atom_count()), -1);
  const auto units = graph.units();
  for (std::size_t u = 0; u < units.size(); ++u) {
    for (int a : units[u].atoms) {
      if (a >= 0 && a < graph.atom_count()) unit_of[static_cast<std::size_t>(a)] = static_cast<int>(u);
    }
  }
  for (const auto& b : graph.bonds()) {
    if (unit_of[static_cast<std::size_t>(b.a)] != unit_of[static_cast<std::size_t>(b.b)]) {
      report.errors.push_back(make(ErrorCode::kInvalidGraph,
                                   "bond " + std::to_string(b.a) + "-" + std::to_string(b.b) +
                                       " crosses copolymer units",
                                   b.a));
    }
  }
  for (std::size_t u = 0; u < units.size(); ++u) {
    const auto& atoms = units[u].atoms;
    if (atoms.empty()) continue;
    std::set<int> seen{atoms.front()};
    std::vector<int> stack{atoms.front()};
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      for (const auto& nb : graph.neighbors(x)) {
        if (seen.insert(nb.atom).second) stack.push_back(nb.atom);
      }
    }
    if (seen.size() != atoms.size()) {
      report.errors.push_back(make(ErrorCode::kInvalidGraph, "unit " + std::to_string(u) + " is not connected"));
    }
  }

  if (mode == ValidationMode::kCru) {
    for (std::size_t u = 0; u < units.size(); ++u) {
      int stars = 0;
      for (int a : units[u].atoms) {
        if (graph.atom(a).is_star()) ++stars;
      }
      if (stars != 2) {
        report.warnings.push_back({"W_NON_STANDARD_ENDPOINTS",
                                   "unit " + std::to_string(u) + " has " + std::to_string(stars) +
                                       " star endpoints (expected 2)",
                                   std::nullopt});
      }
    }
  } else if (report.star_count > 0) {
    report.warnings.push_back({"W_STAR_IN_MOLECULE",
                               "molecule contains " + std::to_string(report.star_count) + " star atoms",
                               graph.star_indices().front()});
  }
  for (const auto& note : graph.notes()) {
    report.warnings.push_back({note,
                               note == "W_STEREO_IGNORED" ? "stereochemistry markup ignored"
                                                          : "isotope markup ignored",
                               std::nullopt});
  }
  report.is_valid = report.errors.empty();
  return report;
}

ValidationReport validate_text(std::string_view text, ValidationMode mode) {
  try {
    return validate(parse_psmiles(text), mode);
  } catch (const ParseError& e) {
    ValidationReport report;
    report.is_valid = false;
    report.errors.push_back({std::string(e.code_name()), e.what(), std::nullopt});
    return report;
  }
}

void require_valid(const PolymerGraph& graph) {
  const auto report = validate(graph, ValidationMode::kCru);
  if (!report.is_valid) {
    throw Error(ErrorCode::kInvalidGraph, report.errors.front().code + ": " + report.errors.front().message);
  }
}

}  // namespace polyforge

#pragma once

// Polymer SMILES (p-SMILES): lexing, parsing into molecular graphs,
// validation and canonical writing.
//
// Extensions over plain SMILES:
//   `*`  attachment point of a constitutional repeating unit
//   `.`  separates the units of a copolymer
//   `^`  flags a branch atom (recorded only; topology is unchanged)

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polyforge/error.hpp"

namespace polyforge {

enum class BondOrder : std::uint8_t { kSingle = 1, kDouble = 2, kTriple = 3, kAromatic = 4 };

std::string_view bond_order_name(BondOrder order);

struct AtomNode {
  std::string element;             // "C", "Cl", "*", ...
  int formal_charge = 0;
  bool aromatic = false;
  std::optional<int> explicit_h;   // bracket atoms only
  bool branch_marker = false;

  bool is_star() const { return element == "*"; }
  bool operator==(const AtomNode&) const = default;
};

struct BondEdge {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::kSingle;

  int other(int atom) const { return atom == a ? b : a; }
};

struct Neighbor {
  int atom;
  int bond;
};

struct ConnectedUnit {
  std::vector<int> atoms;
};

/// Element data for the bundled valence table.
struct ElementInfo {
  std::string_view symbol;
  int atomic_number;
  std::span<const int> valences;  // ascending; empty = unchecked
  bool organic;                   // may be written without brackets
};

const ElementInfo* find_element(std::string_view symbol);

/// Immutable molecular graph of one or more repeat units. Build with
/// `GraphBuilder` or `parse_psmiles`.
class PolymerGraph {
 public:
  PolymerGraph() = default;

  std::span<const AtomNode> atoms() const { return atoms_; }
  std::span<const BondEdge> bonds() const { return bonds_; }
  const AtomNode& atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
  const BondEdge& bond(int i) const { return bonds_[static_cast<std::size_t>(i)]; }
  std::span<const Neighbor> neighbors(int i) const { return adjacency_[static_cast<std::size_t>(i)]; }
  std::span<const ConnectedUnit> units() const { return units_; }
  std::span<const int> star_indices() const { return stars_; }
  std::span<const int> branch_markers() const { return branch_markers_; }
  const std::string& source_text() const { return source_text_; }

  int atom_count() const { return static_cast<int>(atoms_.size()); }
  int bond_count() const { return static_cast<int>(bonds_.size()); }
  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }

  /// Non-star, non-hydrogen atoms.
  int heavy_atom_count() const;

  /// Bond-order sum with aromatic bonds counted as 1.5, floored. Aromatic
  /// atoms that would exceed their maximum valence (pyrrole-type N, ring
  /// carbons with exocyclic double bonds) count each aromatic bond as 1.
  int bond_order_sum(int i) const;
  /// Hydrogens implied by the valence model, ignoring any bracket H count.
  int valence_h(int i) const;
  int implicit_h(int i) const;
  int total_h(int i) const;
  std::optional<int> max_valence(int i) const;

  /// Index of the bond between a and b, or -1.
  int find_bond(int a, int b) const;

  /// Smallest set of smallest rings, each as an atom cycle in path order.
  std::span<const std::vector<int>> rings() const { return rings_; }
  bool atom_in_ring(int i) const { return atom_ring_[static_cast<std::size_t>(i)] != 0; }
  bool bond_in_ring(int i) const { return bond_ring_[static_cast<std::size_t>(i)] != 0; }
  int ring_count() const { return static_cast<int>(rings_.size()); }

  /// Parser notes such as ignored stereo or isotope markup.
  std::span<const std::string> notes() const { return notes_; }

 private:
  friend class GraphBuilder;

  std::vector<AtomNode> atoms_;
  std::vector<BondEdge> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<ConnectedUnit> units_;
  std::vector<int> stars_;
  std::vector<int> branch_markers_;
  std::vector<std::vector<int>> rings_;
  std::vector<std::uint8_t> atom_ring_;
  std::vector<std::uint8_t> bond_ring_;
  std::vector<std::string> notes_;
  std::string source_text_;
};

/// Mutable staging area for a `PolymerGraph`. `add_bond` rejects self bonds
/// and duplicates; chemistry (valence, aromaticity) is checked by `validate`.
class GraphBuilder {
 public:
  GraphBuilder() = default;
  explicit GraphBuilder(const PolymerGraph& graph);

  int add_atom(AtomNode atom);
  int add_bond(int a, int b, BondOrder order);
  void remove_bond(int a, int b);
  /// Removes atoms and their bonds; remaining atoms keep relative order.
  void remove_atoms(std::span<const int> indices);

  AtomNode& atom(int i) { return atoms_.at(static_cast<std::size_t>(i)); }
  int atom_count() const { return static_cast<int>(atoms_.size()); }
  std::vector<BondEdge>& bonds() { return bonds_; }

  /// Explicit unit segmentation; defaults to connected components.
  void set_units(std::vector<ConnectedUnit> units) { units_ = std::move(units); }
  void set_source_text(std::string text) { source_text_ = std::move(text); }
  void add_note(std::string note) { notes_.push_back(std::move(note)); }

  PolymerGraph build() const;

 private:
  std::vector<AtomNode> atoms_;
  std::vector<BondEdge> bonds_;
  std::optional<std::vector<ConnectedUnit>> units_;
  std::vector<std::string> notes_;
  std::string source_text_;
};

// ---------------------------------------------------------------- tokens

enum class TokenKind : std::uint8_t {
  kAtom,          // organic-subset or aromatic atom, `*`
  kBracketAtom,   // [...]
  kBond,          // - = # : / backslash
  kRingDigit,     // 0-9 or %nn
  kBranchOpen,
  kBranchClose,
  kDot,
  kBranchMarker,  // ^
};

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t offset;
};

/// Lossless lexer: concatenating token texts reproduces the input.
std::vector<Token> tokenize(std::string_view text);

/// Parses a p-SMILES string; throws ParseError on any grammar, ring,
/// valence or star-degree problem.
PolymerGraph parse_psmiles(std::string_view text);

// ---------------------------------------------------------- validation

enum class ValidationMode { kCru, kMolecule };

struct Diagnostic {
  std::string code;
  std::string message;
  std::optional<int> atom;
};

struct ValidationReport {
  bool is_valid = true;
  int star_count = 0;
  std::vector<Diagnostic> warnings;
  std::vector<Diagnostic> errors;
};

ValidationReport validate(const PolymerGraph& graph, ValidationMode mode);

/// Parses then validates; parse failures become report errors.
ValidationReport validate_text(std::string_view text, ValidationMode mode);

/// Throws Error(kInvalidGraph) naming the first error, if any.
void require_valid(const PolymerGraph& graph);

// ------------------------------------------------------- canonical form

/// Canonical atom ranking (0..n-1) from invariant refinement plus an
/// exhaustive individualization search with automorphism pruning.
std::vector<int> canonical_ranks(const PolymerGraph& graph);

/// Canonical p-SMILES. Throws Error(kInvalidGraph) for invalid graphs.
std::string canonicalize(const PolymerGraph& graph);

/// Shorthand for canonicalize(parse_psmiles(text)).
std::string canonical_smiles(std::string_view text);

// ------------------------------------------------------------- helpers

/// Graph with atoms renumbered: new index of old atom i is perm[i].
PolymerGraph permute_atoms(const PolymerGraph& graph, std::span<const int> perm);

/// Removes star atoms; their partners gain a hydrogen (brackets included).
PolymerGraph strip_stars(const PolymerGraph& graph);

/// Disjoint union, units appended in order.
PolymerGraph disjoint_union(const PolymerGraph& a, const PolymerGraph& b);

}  // namespace polyforge

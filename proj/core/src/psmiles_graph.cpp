#include <algorithm>
#include <array>
#include <cstdlib>
#include <numeric>
#include <queue>
#include <tuple>

#include "polyforge/psmiles.hpp"

namespace polyforge {
namespace {

constexpr std::array<int, 0> kNone{};
constexpr std::array<int, 1> kV1{1};
constexpr std::array<int, 1> kV2{2};
constexpr std::array<int, 1> kV3{3};
constexpr std::array<int, 1> kV4{4};
constexpr std::array<int, 2> kV35{3, 5};
constexpr std::array<int, 3> kV246{2, 4, 6};

// Organic subset plus the bracket-only elements we are likely to meet.
// Bracket-only elements carry no valence table and are not valence-checked.
const std::array<ElementInfo, 47> kElements{{
    {"*", 0, kV1, true},   {"H", 1, kV1, false},  {"B", 5, kV3, true},
    {"C", 6, kV4, true},   {"N", 7, kV3, true},   {"O", 8, kV2, true},
    {"F", 9, kV1, true},   {"Si", 14, kV4, true}, {"P", 15, kV35, true},
    {"S", 16, kV246, true}, {"Cl", 17, kV1, true}, {"Br", 35, kV1, true},
    {"I", 53, kV1, true},  {"Li", 3, kNone, false}, {"Be", 4, kNone, false},
    {"Na", 11, kNone, false}, {"Mg", 12, kNone, false}, {"Al", 13, kNone, false},
    {"K", 19, kNone, false}, {"Ca", 20, kNone, false}, {"Ti", 22, kNone, false},
    {"Cr", 24, kNone, false}, {"Mn", 25, kNone, false}, {"Fe", 26, kNone, false},
    {"Co", 27, kNone, false}, {"Ni", 28, kNone, false}, {"Cu", 29, kNone, false},
    {"Zn", 30, kNone, false}, {"Ga", 31, kNone, false}, {"Ge", 32, kNone, false},
    {"As", 33, kNone, false}, {"Se", 34, kNone, false}, {"Zr", 40, kNone, false},
    {"Ag", 47, kNone, false}, {"Sn", 50, kNone, false}, {"Sb", 51, kNone, false},
    {"Te", 52, kNone, false}, {"Pt", 78, kNone, false}, {"Au", 79, kNone, false},
    {"Pb", 82, kNone, false}, {"Hg", 80, kNone, false}, {"Bi", 83, kNone, false},
    {"Cd", 48, kNone, false}, {"Pd", 46, kNone, false}, {"Mo", 42, kNone, false},
    {"Tl", 81, kNone, false}, {"Cs", 55, kNone, false},
}};

// Charge-adjusted valences: isoelectronic shift per group.
std::vector<int> adjusted_valences(const ElementInfo& info, int charge) {
  std::vector<int> out;
  for (int v : info.valences) {
    int adjusted = v;
    switch (info.atomic_number) {
      case 5: adjusted = v - charge; break;
      case 1: case 6: case 14: adjusted = v - std::abs(charge); break;
      case 0: break;
      default: adjusted = v + charge; break;
    }
    if (adjusted >= 0 && std::find(out.begin(), out.end(), adjusted) == out.end()) {
      out.push_back(adjusted);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

int half_units(BondOrder order) {
  switch (order) {
    case BondOrder::kSingle: return 2;
    case BondOrder::kDouble: return 4;
    case BondOrder::kTriple: return 6;
    case BondOrder::kAromatic: return 3;
  }
  return 2;
}

using Bitset = std::vector<std::uint64_t>;

bool bit_any(const Bitset& b) {
  return std::any_of(b.begin(), b.end(), [](std::uint64_t w) { return w != 0; });
}

int lowest_bit(const Bitset& b) {
  for (std::size_t w = 0; w < b.size(); ++w) {
    if (b[w] != 0) return static_cast<int>(w * 64 + static_cast<std::size_t>(__builtin_ctzll(b[w])));
  }
  return -1;
}

struct Candidate {
  std::vector<int> atoms;
  Bitset bonds;
  std::vector<int> sorted_atoms;
};

// Horton candidate cycles reduced to a minimum cycle basis over GF(2).
std::vector<std::vector<int>> perceive_rings(int n, const std::vector<BondEdge>& bonds,
                                             const std::vector<std::vector<Neighbor>>& adj,
                                             int components) {
  const int m = static_cast<int>(bonds.size());
  const int expected = m - n + components;
  if (expected <= 0) return {};
  const std::size_t words = (static_cast<std::size_t>(m) + 63) / 64;

  std::vector<Candidate> candidates;
  std::vector<int> dist(static_cast<std::size_t>(n));
  std::vector<int> parent_bond(static_cast<std::size_t>(n));
  std::vector<int> parent_atom(static_cast<std::size_t>(n));
  std::vector<int> mark(static_cast<std::size_t>(n), -1);

  for (int root = 0; root < n; ++root) {
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(parent_bond.begin(), parent_bond.end(), -1);
    std::fill(parent_atom.begin(), parent_atom.end(), -1);
    std::queue<int> queue;
    dist[static_cast<std::size_t>(root)] = 0;
    queue.push(root);
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop();
      for (const auto& nb : adj[static_cast<std::size_t>(u)]) {
        if (dist[static_cast<std::size_t>(nb.atom)] < 0) {
          dist[static_cast<std::size_t>(nb.atom)] = dist[static_cast<std::size_t>(u)] + 1;
          parent_bond[static_cast<std::size_t>(nb.atom)] = nb.bond;
          parent_atom[static_cast<std::size_t>(nb.atom)] = u;
          queue.push(nb.atom);
        }
      }
    }
    for (int e = 0; e < m; ++e) {
      const int u = bonds[static_cast<std::size_t>(e)].a;
      const int v = bonds[static_cast<std::size_t>(e)].b;
      const int du = dist[static_cast<std::size_t>(u)];
      const int dv = dist[static_cast<std::size_t>(v)];
      if (du < 0 || dv < 0) continue;
      if (parent_bond[static_cast<std::size_t>(u)] == e || parent_bond[static_cast<std::size_t>(v)] == e) continue;
      if (std::abs(du - dv) > 1) continue;
      std::vector<int> pu;
      for (int x = u; x != -1; x = parent_atom[static_cast<std::size_t>(x)]) pu.push_back(x);
      std::vector<int> pv;
      for (int x = v; x != -1; x = parent_atom[static_cast<std::size_t>(x)]) pv.push_back(x);
      const int stamp = root * m + e;
      for (int x : pu) mark[static_cast<std::size_t>(x)] = stamp;
      bool disjoint = true;
      for (std::size_t k = 0; k + 1 < pv.size(); ++k) {
        if (mark[static_cast<std::size_t>(pv[k])] == stamp) {
          disjoint = false;
          break;
        }
      }
      if (!disjoint) continue;
      Candidate c;
      c.atoms.assign(pu.rbegin(), pu.rend());
      c.atoms.insert(c.atoms.end(), pv.begin(), pv.end() - 1);
      c.bonds.assign(words, 0);
      auto set_bond = [&](int b) { c.bonds[static_cast<std::size_t>(b) / 64] |= (std::uint64_t{1} << (b % 64)); };
      set_bond(e);
      for (std::size_t k = 0; k + 1 < pu.size(); ++k) set_bond(parent_bond[static_cast<std::size_t>(pu[k])]);
      for (std::size_t k = 0; k + 1 < pv.size(); ++k) set_bond(parent_bond[static_cast<std::size_t>(pv[k])]);
      c.sorted_atoms = c.atoms;
      std::sort(c.sorted_atoms.begin(), c.sorted_atoms.end());
      candidates.push_back(std::move(c));
    }
  }

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (x.atoms.size() != y.atoms.size()) return x.atoms.size() < y.atoms.size();
    if (x.sorted_atoms != y.sorted_atoms) return x.sorted_atoms < y.sorted_atoms;
    return x.bonds < y.bonds;
  });

  std::vector<Bitset> basis;
  std::vector<int> pivots;
  std::vector<std::vector<int>> rings;
  for (auto& c : candidates) {
    if (static_cast<int>(rings.size()) == expected) break;
    Bitset v = c.bonds;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const int p = pivots[k];
      if (v[static_cast<std::size_t>(p) / 64] & (std::uint64_t{1} << (p % 64))) {
        for (std::size_t w = 0; w < words; ++w) v[w] ^= basis[k][w];
      }
    }
    if (!bit_any(v)) continue;
    const int p = lowest_bit(v);
    // Keep the basis fully reduced on pivot columns.
    for (std::size_t k = 0; k < basis.size(); ++k) {
      if (basis[k][static_cast<std::size_t>(p) / 64] & (std::uint64_t{1} << (p % 64))) {
        for (std::size_t w = 0; w < words; ++w) basis[k][w] ^= v[w];
      }
    }
    basis.push_back(std::move(v));
    pivots.push_back(p);
    rings.push_back(c.atoms);
  }
  return rings;
}

}  // namespace

std::string_view bond_order_name(BondOrder order) {
  switch (order) {
    case BondOrder::kSingle: return "single";
    case BondOrder::kDouble: return "double";
    case BondOrder::kTriple: return "triple";
    case BondOrder::kAromatic: return "aromatic";
  }
  return "single";
}

const ElementInfo* find_element(std::string_view symbol) {
  for (const auto& e : kElements) {
    if (e.symbol == symbol) return &e;
  }
  return nullptr;
}

// ------------------------------------------------------------ PolymerGraph

int PolymerGraph::heavy_atom_count() const {
  return static_cast<int>(std::count_if(atoms_.begin(), atoms_.end(), [](const AtomNode& a) {
    return !a.is_star() && a.element != "H";
  }));
}

int PolymerGraph::bond_order_sum(int i) const {
  int twice = 0;
  int aromatic = 0;
  for (const auto& nb : neighbors(i)) {
    const BondOrder order = bonds_[static_cast<std::size_t>(nb.bond)].order;
    twice += half_units(order);
    if (order == BondOrder::kAromatic) ++aromatic;
  }
  int sum = twice / 2;
  const AtomNode& a = atom(i);
  if (a.aromatic && aromatic > 0) {
    const auto cap = max_valence(i);
    if (cap && sum + a.explicit_h.value_or(0) > *cap) sum = (twice - aromatic) / 2;
  }
  return sum;
}

std::optional<int> PolymerGraph::max_valence(int i) const {
  const AtomNode& a = atom(i);
  const ElementInfo* info = find_element(a.element);
  if (info == nullptr || info->valences.empty()) return std::nullopt;
  const auto vs = adjusted_valences(*info, a.formal_charge);
  if (vs.empty()) return 0;
  return vs.back();
}

int PolymerGraph::implicit_h(int i) const {
  return atom(i).explicit_h ? 0 : valence_h(i);
}

int PolymerGraph::valence_h(int i) const {
  const AtomNode& a = atom(i);
  if (a.is_star() || a.element == "H") return 0;
  const ElementInfo* info = find_element(a.element);
  if (info == nullptr || info->valences.empty()) return 0;
  const auto vs = adjusted_valences(*info, a.formal_charge);
  if (vs.empty()) return 0;
  const int sum = bond_order_sum(i);
  if (a.aromatic) {
    if (a.element != "C" && a.element != "B") return 0;
    return std::max(0, vs.front() - sum);
  }
  for (int v : vs) {
    if (v >= sum) return v - sum;
  }
  return 0;
}

int PolymerGraph::total_h(int i) const {
  const AtomNode& a = atom(i);
  return a.explicit_h ? *a.explicit_h : implicit_h(i);
}

int PolymerGraph::find_bond(int a, int b) const {
  if (a < 0 || a >= atom_count()) return -1;
  for (const auto& nb : neighbors(a)) {
    if (nb.atom == b) return nb.bond;
  }
  return -1;
}

// ------------------------------------------------------------ GraphBuilder

GraphBuilder::GraphBuilder(const PolymerGraph& graph)
    : atoms_(graph.atoms().begin(), graph.atoms().end()),
      bonds_(graph.bonds().begin(), graph.bonds().end()),
      notes_(graph.notes().begin(), graph.notes().end()),
      source_text_(graph.source_text()) {}

int GraphBuilder::add_atom(AtomNode atom) {
  atoms_.push_back(std::move(atom));
  return static_cast<int>(atoms_.size()) - 1;
}

int GraphBuilder::add_bond(int a, int b, BondOrder order) {
  const int n = atom_count();
  if (a < 0 || b < 0 || a >= n || b >= n) {
    throw Error(ErrorCode::kInvalidGraph, "bond endpoint out of range");
  }
  if (a == b) throw Error(ErrorCode::kSelfBond, "bond connects atom " + std::to_string(a) + " to itself");
  for (const auto& e : bonds_) {
    if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) {
      throw Error(ErrorCode::kDuplicateBond,
                  "duplicate bond between atoms " + std::to_string(a) + " and " + std::to_string(b));
    }
  }
  bonds_.push_back({a, b, order});
  return static_cast<int>(bonds_.size()) - 1;
}

void GraphBuilder::remove_bond(int a, int b) {
  std::erase_if(bonds_, [&](const BondEdge& e) {
    return (e.a == a && e.b == b) || (e.a == b && e.b == a);
  });
}

void GraphBuilder::remove_atoms(std::span<const int> indices) {
  std::vector<int> remap(atoms_.size(), 0);
  for (int i : indices) {
    if (i >= 0 && i < atom_count()) remap[static_cast<std::size_t>(i)] = -1;
  }
  int next = 0;
  std::vector<AtomNode> kept;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (remap[i] < 0) continue;
    remap[i] = next++;
    kept.push_back(std::move(atoms_[i]));
  }
  std::vector<BondEdge> kept_bonds;
  for (const auto& e : bonds_) {
    const int a = remap[static_cast<std::size_t>(e.a)];
    const int b = remap[static_cast<std::size_t>(e.b)];
    if (a >= 0 && b >= 0) kept_bonds.push_back({a, b, e.order});
  }
  atoms_ = std::move(kept);
  bonds_ = std::move(kept_bonds);
  units_.reset();
}

PolymerGraph GraphBuilder::build() const {
  PolymerGraph g;
  g.atoms_ = atoms_;
  g.bonds_ = bonds_;
  g.notes_ = notes_;
  g.source_text_ = source_text_;
  const int n = static_cast<int>(atoms_.size());
  g.adjacency_.assign(static_cast<std::size_t>(n), {});
  for (int e = 0; e < static_cast<int>(bonds_.size()); ++e) {
    const auto& b = bonds_[static_cast<std::size_t>(e)];
    g.adjacency_[static_cast<std::size_t>(b.a)].push_back({b.b, e});
    g.adjacency_[static_cast<std::size_t>(b.b)].push_back({b.a, e});
  }
  for (int i = 0; i < n; ++i) {
    if (atoms_[static_cast<std::size_t>(i)].is_star()) g.stars_.push_back(i);
    if (atoms_[static_cast<std::size_t>(i)].branch_marker) g.branch_markers_.push_back(i);
  }

  // Connected components, ordered by smallest member.
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  std::vector<ConnectedUnit> components;
  for (int s = 0; s < n; ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    ConnectedUnit unit;
    std::vector<int> stack{s};
    comp[static_cast<std::size_t>(s)] = static_cast<int>(components.size());
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      unit.atoms.push_back(u);
      for (const auto& nb : g.adjacency_[static_cast<std::size_t>(u)]) {
        if (comp[static_cast<std::size_t>(nb.atom)] < 0) {
          comp[static_cast<std::size_t>(nb.atom)] = comp[static_cast<std::size_t>(s)];
          stack.push_back(nb.atom);
        }
      }
    }
    std::sort(unit.atoms.begin(), unit.atoms.end());
    components.push_back(std::move(unit));
  }
  g.units_ = units_ ? *units_ : components;

  g.rings_ = perceive_rings(n, g.bonds_, g.adjacency_, static_cast<int>(components.size()));
  g.atom_ring_.assign(static_cast<std::size_t>(n), 0);
  g.bond_ring_.assign(bonds_.size(), 0);
  for (const auto& ring : g.rings_) {
    for (std::size_t k = 0; k < ring.size(); ++k) {
      const int a = ring[k];
      const int b = ring[(k + 1) % ring.size()];
      g.atom_ring_[static_cast<std::size_t>(a)] = 1;
      const int e = g.find_bond(a, b);
      if (e >= 0) g.bond_ring_[static_cast<std::size_t>(e)] = 1;
    }
  }
  return g;
}

// ----------------------------------------------------------------- helpers

PolymerGraph permute_atoms(const PolymerGraph& graph, std::span<const int> perm) {
  const int n = graph.atom_count();
  if (static_cast<int>(perm.size()) != n) {
    throw Error(ErrorCode::kInvalidArgument, "permutation size mismatch");
  }
  std::vector<AtomNode> atoms(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) atoms[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = graph.atom(i);
  GraphBuilder b;
  for (auto& a : atoms) b.add_atom(std::move(a));
  for (const auto& e : graph.bonds()) {
    b.add_bond(perm[static_cast<std::size_t>(e.a)], perm[static_cast<std::size_t>(e.b)], e.order);
  }
  std::vector<ConnectedUnit> units;
  for (const auto& u : graph.units()) {
    ConnectedUnit mapped;
    for (int a : u.atoms) mapped.atoms.push_back(perm[static_cast<std::size_t>(a)]);
    std::sort(mapped.atoms.begin(), mapped.atoms.end());
    units.push_back(std::move(mapped));
  }
  b.set_units(std::move(units));
  b.set_source_text(graph.source_text());
  return b.build();
}

PolymerGraph strip_stars(const PolymerGraph& graph) {
  if (graph.star_indices().empty()) return graph;
  GraphBuilder b(graph);
  for (int s : graph.star_indices()) {
    for (const auto& nb : graph.neighbors(s)) {
      auto& partner = b.atom(nb.atom);
      if (partner.explicit_h) partner.explicit_h = *partner.explicit_h + 1;
    }
  }
  b.remove_atoms(graph.star_indices());
  return b.build();
}

PolymerGraph disjoint_union(const PolymerGraph& a, const PolymerGraph& b) {
  GraphBuilder out(a);
  const int offset = a.atom_count();
  for (const auto& atom : b.atoms()) out.add_atom(atom);
  for (const auto& e : b.bonds()) out.add_bond(e.a + offset, e.b + offset, e.order);
  std::vector<ConnectedUnit> units(a.units().begin(), a.units().end());
  for (const auto& u : b.units()) {
    ConnectedUnit shifted;
    for (int x : u.atoms) shifted.atoms.push_back(x + offset);
    units.push_back(std::move(shifted));
  }
  out.set_units(std::move(units));
  out.set_source_text(a.source_text() + "." + b.source_text());
  return out.build();
}

}  // namespace polyforge

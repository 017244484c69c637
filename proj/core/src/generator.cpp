#include "polyforge/generator.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "polyforge/rng.hpp"

namespace polyforge {
namespace {

bool has_double_o(const PolymerGraph& g, int c) {
  for (const auto& nb : g.neighbors(c)) {
    if (g.atom(nb.atom).element == "O" && g.bond(nb.bond).order == BondOrder::kDouble) return true;
  }
  return false;
}

bool plain(const PolymerGraph& g, int i, std::string_view element) {
  const auto& a = g.atom(i);
  return a.element == element && !a.aromatic && a.formal_charge == 0;
}

// Terminal heteroatom X-H(n) singly bonded to a non-carbonyl carbon.
bool terminal_on_carbon(const PolymerGraph& g, int x, std::string_view element, int hydrogens) {
  if (!plain(g, x, element) || g.degree(x) != 1 || g.total_h(x) != hydrogens) return false;
  const auto& nb = g.neighbors(x).front();
  return g.atom(nb.atom).element == "C" && g.bond(nb.bond).order == BondOrder::kSingle &&
         !has_double_o(g, nb.atom);
}

std::optional<GroupMatch> carboxyl_at(const PolymerGraph& g, int c) {
  if (!plain(g, c, "C") || g.degree(c) < 2 || g.degree(c) > 3) return std::nullopt;
  int carbonyl = -1, hydroxyl = -1;
  for (const auto& nb : g.neighbors(c)) {
    if (!plain(g, nb.atom, "O") || g.degree(nb.atom) != 1) continue;
    const BondOrder order = g.bond(nb.bond).order;
    if (order == BondOrder::kDouble && carbonyl < 0) carbonyl = nb.atom;
    if (order == BondOrder::kSingle && g.total_h(nb.atom) == 1 && hydroxyl < 0) hydroxyl = nb.atom;
  }
  if (carbonyl < 0 || hydroxyl < 0) return std::nullopt;
  return GroupMatch{GroupId::kCarboxyl, {c, carbonyl, hydroxyl}};
}

std::optional<GroupMatch> isocyanate_at(const PolymerGraph& g, int n) {
  if (!plain(g, n, "N") || g.degree(n) != 2) return std::nullopt;
  for (const auto& nb : g.neighbors(n)) {
    const int c = nb.atom;
    if (g.bond(nb.bond).order != BondOrder::kDouble || !plain(g, c, "C") || g.degree(c) != 2) continue;
    for (const auto& nb2 : g.neighbors(c)) {
      if (nb2.atom != n && plain(g, nb2.atom, "O") && g.bond(nb2.bond).order == BondOrder::kDouble &&
          g.degree(nb2.atom) == 1) {
        return GroupMatch{GroupId::kIsocyanate, {n, c, nb2.atom}};
      }
    }
  }
  return std::nullopt;
}

int min_atom(const GroupMatch& m) { return *std::min_element(m.atoms.begin(), m.atoms.end()); }

std::set<int> atom_set(const std::vector<int>& atoms) { return {atoms.begin(), atoms.end()}; }

// The reactant-B side of a template: the carbon that links, atoms that
// leave, and a bond that drops to single order.
struct AcceptorSite {
  int carbon = -1;
  int leaving = -1;
  int demote_to = -1;  // neighbour of `carbon` whose double bond becomes single
};

AcceptorSite acceptor_site(const PolymerGraph& g, const GroupMatch& m) {
  switch (m.id) {
    case GroupId::kCarboxyl: return {m.atoms[0], m.atoms[2], -1};
    case GroupId::kHydroxyl: return {g.neighbors(m.atoms[0]).front().atom, m.atoms[0], -1};
    case GroupId::kIsocyanate: return {m.atoms[1], -1, m.atoms[0]};
    case GroupId::kAmine: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "group " + std::string(group_id_name(m.id)) + " cannot accept a link");
}

}  // namespace

std::string_view group_id_name(GroupId id) {
  switch (id) {
    case GroupId::kHydroxyl: return "OH";
    case GroupId::kCarboxyl: return "COOH";
    case GroupId::kAmine: return "NH2";
    case GroupId::kIsocyanate: return "NCO";
  }
  return "OH";
}

GroupId group_id_from_name(std::string_view name) {
  for (auto id : {GroupId::kHydroxyl, GroupId::kCarboxyl, GroupId::kAmine, GroupId::kIsocyanate}) {
    if (group_id_name(id) == name) return id;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown functional group '" + std::string(name) + "'");
}

std::vector<GroupMatch> find_groups(const PolymerGraph& g) {
  std::vector<GroupMatch> out;
  for (int i = 0; i < g.atom_count(); ++i) {
    if (terminal_on_carbon(g, i, "O", 1)) out.push_back({GroupId::kHydroxyl, {i}});
    if (terminal_on_carbon(g, i, "N", 2)) out.push_back({GroupId::kAmine, {i}});
    if (auto m = carboxyl_at(g, i)) out.push_back(*m);
    if (auto m = isocyanate_at(g, i)) out.push_back(*m);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const GroupMatch& x, const GroupMatch& y) { return min_atom(x) < min_atom(y); });
  return out;
}

std::vector<GroupMatch> Reactant::matches(GroupId id) const {
  std::vector<GroupMatch> out;
  for (const auto& m : groups) {
    if (m.id == id) out.push_back(m);
  }
  return out;
}

Reactant make_reactant(std::string_view smiles, std::string source_tag) {
  Reactant r;
  r.smiles = std::string(smiles);
  r.graph = parse_psmiles(smiles);
  const auto report = validate(r.graph, ValidationMode::kMolecule);
  if (!report.is_valid) {
    throw Error(ErrorCode::kInvalidGraph, "reactant '" + r.smiles + "': " + report.errors.front().message);
  }
  if (!r.graph.star_indices().empty()) {
    throw Error(ErrorCode::kInvalidGraph, "reactant '" + r.smiles + "' contains star atoms");
  }
  r.groups = find_groups(r.graph);
  r.source_tag = std::move(source_tag);
  return r;
}

std::vector<Reactant> parse_reactant_bag(std::string_view jsonl) {
  std::vector<Reactant> bag;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "reactant bag line " + std::to_string(line_no);
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSchemaMismatch, where + ": " + e.what());
    }
    if (!row.is_object() || !row.contains("smiles") || !row["smiles"].is_string() || !row.contains("groups") ||
        !row["groups"].is_array()) {
      throw Error(ErrorCode::kSchemaMismatch, where + ": expected {smiles, groups, source_tag}");
    }
    Reactant r = make_reactant(row["smiles"].get<std::string>(), row.value("source_tag", std::string{}));
    std::vector<GroupMatch> annotated;
    for (const auto& g : row["groups"]) {
      if (!g.contains("id") || !g["id"].is_string() || !g.contains("atoms") || !g["atoms"].is_array()) {
        throw Error(ErrorCode::kSchemaMismatch, where + ": group needs 'id' and 'atoms'");
      }
      const GroupId id = group_id_from_name(g["id"].get<std::string>());
      const auto atoms = atom_set(g["atoms"].get<std::vector<int>>());
      auto hit = std::find_if(r.groups.begin(), r.groups.end(),
                              [&](const GroupMatch& m) { return m.id == id && atom_set(m.atoms) == atoms; });
      if (hit == r.groups.end()) {
        throw Error(ErrorCode::kSchemaMismatch,
                    where + ": annotated " + std::string(group_id_name(id)) + " does not match its pattern");
      }
      annotated.push_back(*hit);
    }
    if (annotated.size() != r.groups.size()) {
      throw Error(ErrorCode::kSchemaMismatch, where + ": " + std::to_string(annotated.size()) +
                                                  " groups annotated, pattern scan finds " +
                                                  std::to_string(r.groups.size()));
    }
    bag.push_back(std::move(r));
  }
  return bag;
}

std::vector<Reactant> load_reactant_bag(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open reactant bag " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_reactant_bag(buf.str());
}

nlohmann::json to_json(const Reactant& reactant) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& m : reactant.groups) groups.push_back({{"id", group_id_name(m.id)}, {"atoms", m.atoms}});
  return {{"smiles", reactant.smiles}, {"groups", std::move(groups)}, {"source_tag", reactant.source_tag}};
}

std::span<const ReactionTemplate> template_library() {
  static const std::vector<ReactionTemplate> kTemplates = {
      {"polyester", {GroupId::kHydroxyl, GroupId::kCarboxyl}, "H2O per ester bond"},
      {"polyamide", {GroupId::kAmine, GroupId::kCarboxyl}, "H2O per amide bond"},
      {"polyether", {GroupId::kHydroxyl, GroupId::kHydroxyl}, "H2O per ether bond (dehydration)"},
      {"polyurethane", {GroupId::kHydroxyl, GroupId::kIsocyanate}, "none (addition)"},
  };
  return kTemplates;
}

const ReactionTemplate& find_template(std::string_view id) {
  for (const auto& t : template_library()) {
    if (t.id == id) return t;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown reaction template '" + std::string(id) + "'");
}

PolymerGraph apply_template(const Reactant& a, const Reactant& b, const ReactionTemplate& t) {
  const auto ga = a.matches(t.required_groups[0]);
  const auto gb = b.matches(t.required_groups[1]);
  if (ga.size() < 2 || gb.size() < 2) {
    const bool first = ga.size() < 2;
    throw Error(ErrorCode::kGroupNotFound,
                "template " + t.id + " needs two " + std::string(group_id_name(t.required_groups[first ? 0 : 1])) +
                    " groups on '" + (first ? a.smiles : b.smiles) + "'");
  }
  const int offset = a.graph.atom_count();
  GraphBuilder builder(disjoint_union(a.graph, b.graph));
  builder.set_source_text({});

  std::vector<int> removed;
  auto accept = [&](const GroupMatch& m) {
    const AcceptorSite site = acceptor_site(b.graph, m);
    if (site.leaving >= 0) removed.push_back(site.leaving + offset);
    if (site.demote_to >= 0) {
      for (auto& e : builder.bonds()) {
        if ((e.a == site.carbon + offset && e.b == site.demote_to + offset) ||
            (e.b == site.carbon + offset && e.a == site.demote_to + offset)) {
          e.order = BondOrder::kSingle;
        }
      }
    }
    return site.carbon + offset;
  };

  // Donor heteroatom: the OH oxygen or NH2 nitrogen of reactant A.
  builder.add_bond(ga[0].atoms[0], accept(gb[0]), BondOrder::kSingle);
  AtomNode star;
  star.element = "*";
  const int star_a = builder.add_atom(star);
  builder.add_bond(star_a, ga[1].atoms[0], BondOrder::kSingle);
  const int star_b = builder.add_atom(star);
  builder.add_bond(star_b, accept(gb[1]), BondOrder::kSingle);
  builder.remove_atoms(removed);

  PolymerGraph out = builder.build();
  const auto report = validate(out, ValidationMode::kCru);
  if (!report.is_valid || out.star_indices().size() != 2 || out.units().size() != 1) {
    throw Error(ErrorCode::kRewriteProducedInvalidGraph,
                "template " + t.id + " on '" + a.smiles + "' + '" + b.smiles + "' produced an invalid CRU");
  }
  return out;
}

std::vector<CandidateRecord> enumerate_candidates(std::span<const Reactant> bag,
                                                  std::span<const ReactionTemplate> templates, int limit,
                                                  std::uint64_t seed) {
  if (bag.empty()) throw Error(ErrorCode::kInvalidArgument, "reactant bag is empty");
  if (limit < 1) throw Error(ErrorCode::kInvalidArgument, "limit must be >= 1");
  struct Triple {
    std::size_t t, a, b;
  };
  std::vector<Triple> triples;
  for (std::size_t t = 0; t < templates.size(); ++t) {
    for (std::size_t a = 0; a < bag.size(); ++a) {
      if (bag[a].matches(templates[t].required_groups[0]).size() < 2) continue;
      for (std::size_t b = 0; b < bag.size(); ++b) {
        if (a != b && bag[b].matches(templates[t].required_groups[1]).size() >= 2) triples.push_back({t, a, b});
      }
    }
  }
  if (triples.empty()) throw Error(ErrorCode::kNoApplicablePairs, "no reactant pair matches any template");
  Rng rng(seed);
  rng.shuffle(triples);

  std::vector<CandidateRecord> out;
  std::set<std::string> seen;
  for (const auto& [t, a, b] : triples) {
    if (static_cast<int>(out.size()) >= limit) break;
    std::string cru = canonicalize(apply_template(bag[a], bag[b], templates[t]));
    if (!seen.insert(cru).second) continue;
    CandidateRecord rec;
    rec.cru = std::move(cru);
    ProvenanceStep step;
    step.action = "template";
    step.template_id = templates[t].id;
    step.reactants = {bag[a].smiles, bag[b].smiles};
    rec.provenance.push_back(std::move(step));
    out.push_back(std::move(rec));
  }
  return out;
}

std::string replay_template(const CandidateRecord& record, std::span<const ReactionTemplate> templates) {
  for (const auto& step : record.provenance) {
    if (step.action != "template") continue;
    if (step.reactants.size() != 2) throw Error(ErrorCode::kInvalidArgument, "template step needs two reactants");
    auto t = std::find_if(templates.begin(), templates.end(),
                          [&](const ReactionTemplate& x) { return x.id == step.template_id; });
    if (t == templates.end()) throw Error(ErrorCode::kInvalidArgument, "unknown template " + step.template_id);
    return canonicalize(apply_template(make_reactant(step.reactants[0]), make_reactant(step.reactants[1]), *t));
  }
  throw Error(ErrorCode::kInvalidArgument, "record has no template step");
}

}  // namespace polyforge

#include "polyforge/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "polyforge/rng.hpp"

namespace polyforge {
namespace {

double lookup(const PropertyVector& props, const std::string& id) {
  auto it = props.find(id);
  if (it == props.end()) throw Error(ErrorCode::kMissingProperty, "prediction lacks property '" + id + "'");
  return it->second;
}

double deviation(const Objective& o, double value) {
  if (o.target) return value - *o.target;
  if (value < o.range->first) return value - o.range->first;
  if (value > o.range->second) return value - o.range->second;
  return 0.0;
}

double violation(const Constraint& c, double value) {
  return c.kind == BoundKind::kAtMost ? std::max(0.0, value - c.bound) : std::max(0.0, c.bound - value);
}

std::string_view bound_symbol(BoundKind kind) { return kind == BoundKind::kAtMost ? "<=" : ">="; }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

const PolymerGraph& fragment_graph(const std::string& smiles) {
  static const std::map<std::string, PolymerGraph> kCache = [] {
    std::map<std::string, PolymerGraph> m;
    for (const auto& s : substituent_library()) m.emplace(s, parse_psmiles(s));
    return m;
  }();
  auto it = kCache.find(smiles);
  if (it == kCache.end()) throw Error(ErrorCode::kInvalidEdit, "fragment '" + smiles + "' is not in the substituent library");
  return it->second;
}

// Atoms reachable from `start` without using the bond to `blocked`.
std::vector<int> side_of(const PolymerGraph& g, int start, int blocked) {
  std::vector<char> seen(static_cast<std::size_t>(g.atom_count()), 0);
  std::vector<int> stack{start}, out;
  seen[static_cast<std::size_t>(start)] = 1;
  while (!stack.empty()) {
    const int x = stack.back();
    stack.pop_back();
    out.push_back(x);
    for (const auto& nb : g.neighbors(x)) {
      if (x == start && nb.atom == blocked) continue;
      if (!seen[static_cast<std::size_t>(nb.atom)]) {
        seen[static_cast<std::size_t>(nb.atom)] = 1;
        stack.push_back(nb.atom);
      }
    }
  }
  return out;
}

// A substituent rooted at `site`: the star-free part cut off by removing
// the bond to its parent. Returns the parent and the atoms, if any.
std::optional<std::pair<int, std::vector<int>>> substituent_at(const PolymerGraph& g, int site) {
  if (g.atom(site).is_star()) return std::nullopt;
  for (const auto& nb : g.neighbors(site)) {
    auto atoms = side_of(g, site, nb.atom);
    const bool cut = std::find(atoms.begin(), atoms.end(), nb.atom) == atoms.end();
    const bool star_free =
        std::none_of(atoms.begin(), atoms.end(), [&](int a) { return g.atom(a).is_star(); });
    if (cut && star_free) return std::make_pair(nb.atom, std::move(atoms));
  }
  return std::nullopt;
}

int free_h(const PolymerGraph& g, int i) { return g.atom(i).explicit_h ? *g.atom(i).explicit_h : g.implicit_h(i); }

// Attaches a library fragment to `site` by a single bond.
void attach(GraphBuilder& b, int site, const std::string& fragment) {
  const PolymerGraph& frag = fragment_graph(fragment);
  const int offset = b.atom_count();
  for (const auto& a : frag.atoms()) b.add_atom(a);
  for (const auto& e : frag.bonds()) b.add_bond(e.a + offset, e.b + offset, e.order);
  b.add_bond(site, offset, BondOrder::kSingle);
  auto& h = b.atom(site).explicit_h;
  if (h) h = std::max(0, *h - 1);
}

PolymerGraph finish(const GraphBuilder& b, const PolymerGraph& before) {
  PolymerGraph out = b.build();
  const auto report = validate(out, ValidationMode::kCru);
  if (!report.is_valid) {
    throw Error(ErrorCode::kInvalidGraph, report.errors.front().code + ": " + report.errors.front().message);
  }
  if (out.star_indices().size() != before.star_indices().size()) {
    throw Error(ErrorCode::kInvalidGraph, "edit changed the number of star endpoints");
  }
  return out;
}

bool is_backbone_linkage(const PolymerGraph& g, int i) {
  const auto& a = g.atom(i);
  if (a.is_star() || a.aromatic || g.atom_in_ring(i) || g.degree(i) != 2 || substituent_at(g, i)) return false;
  return std::all_of(g.neighbors(i).begin(), g.neighbors(i).end(),
                     [&](const Neighbor& nb) { return g.bond(nb.bond).order == BondOrder::kSingle; });
}

bool rank_less(const CandidateRecord& x, const CandidateRecord& y) {
  if (*x.objective != *y.objective) return *x.objective < *y.objective;
  return x.cru < y.cru;
}

// Evaluates `jobs` on worker threads; results land in job order.
template <typename Job, typename Fn>
auto parallel_map(const std::vector<Job>& jobs, Fn fn, int threads) {
  using Out = decltype(fn(jobs.front()));
  std::vector<Out> out(jobs.size());
  if (jobs.empty()) return out;
  unsigned n = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(jobs.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) out[i] = fn(jobs[i]);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

struct Proposal {
  const CandidateRecord* parent;
  Edit edit;
};

// Scored edit outcome; empty cru means the edit failed to apply.
struct Outcome {
  CandidateRecord record;
  bool applied = false;
};

Outcome evaluate_proposal(const Proposal& p, const TargetSpec& spec, const Scorer& scorer) {
  Outcome out;
  try {
    const PolymerGraph parent = parse_psmiles(p.parent->cru);
    const PolymerGraph child = apply_edit(parent, p.edit);
    out.record.cru = canonicalize(child);
    out.record.provenance = p.parent->provenance;
    ProvenanceStep step;
    step.action = "edit";
    step.edit = p.edit;
    step.input = p.parent->cru;
    out.record.provenance.push_back(std::move(step));
    scorer.score(out.record, child, spec);
    out.applied = true;
  } catch (const Error&) {
    out.applied = false;
  }
  return out;
}

std::vector<CandidateRecord> gated_seeds(const TargetSpec& spec, std::span<const Reactant> bag,
                                         std::span<const ReactionTemplate> templates, const Scorer& scorer,
                                         int threads) {
  auto seeds = enumerate_candidates(bag, templates, spec.seed_limit, spec.seed);
  auto scored = parallel_map(
      seeds,
      [&](const CandidateRecord& r) {
        CandidateRecord out = r;
        scorer.score(out, parse_psmiles(r.cru), spec);
        return out;
      },
      threads);
  std::erase_if(scored, [&](const CandidateRecord& r) { return *r.sa > spec.sa_gate; });
  if (scored.empty()) {
    throw Error(ErrorCode::kNoFeasibleCandidate, "no enumerated seed passes the SA gate " + fmt(spec.sa_gate));
  }
  return scored;
}

}  // namespace

// ---------------------------------------------------------------- spec

void check_spec(const TargetSpec& spec) {
  if (spec.objectives.empty()) throw Error(ErrorCode::kInvalidArgument, "target spec needs at least one objective");
  for (const auto& o : spec.objectives) {
    property_spec(o.property_id);
    if (!(o.weight > 0) || !std::isfinite(o.weight)) {
      throw Error(ErrorCode::kInvalidArgument, "objective weight for " + o.property_id + " must be positive");
    }
    if (o.target.has_value() == o.range.has_value()) {
      throw Error(ErrorCode::kInvalidArgument, "objective " + o.property_id + " needs exactly one of target or range");
    }
    if (o.range && o.range->first > o.range->second) {
      throw Error(ErrorCode::kInvalidArgument, "objective range for " + o.property_id + " has lo > hi");
    }
  }
  for (const auto& c : spec.constraints) property_spec(c.property_id);
  if (!(spec.sa_gate >= 1.0 && spec.sa_gate <= 10.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sa_gate must lie in [1, 10]");
  }
  if (spec.budget < 0) throw Error(ErrorCode::kInvalidArgument, "budget must be >= 0");
  if (spec.top_k < 1) throw Error(ErrorCode::kInvalidArgument, "top_k must be >= 1");
  if (spec.seed_limit < 1) throw Error(ErrorCode::kInvalidArgument, "seed_limit must be >= 1");
}

TargetSpec target_spec_from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, "target spec: " + msg); };
  if (!j.is_object()) fail("expected an object");
  TargetSpec spec;
  try {
    if (!j.contains("objectives") || !j["objectives"].is_array()) fail("'objectives' must be an array");
    for (const auto& o : j["objectives"]) {
      Objective obj;
      obj.property_id = o.at("property").get<std::string>();
      obj.weight = o.value("weight", 1.0);
      if (o.contains("target")) obj.target = o["target"].get<double>();
      if (o.contains("range")) {
        const auto r = o["range"].get<std::vector<double>>();
        if (r.size() != 2) fail("range must be [lo, hi]");
        obj.range = std::make_pair(r[0], r[1]);
      }
      spec.objectives.push_back(std::move(obj));
    }
    for (const auto& c : j.value("constraints", nlohmann::json::array())) {
      Constraint con;
      con.property_id = c.at("property").get<std::string>();
      const auto kind = c.at("bound").get<std::string>();
      if (kind == "<=") {
        con.kind = BoundKind::kAtMost;
      } else if (kind == ">=") {
        con.kind = BoundKind::kAtLeast;
      } else {
        fail("constraint bound must be \"<=\" or \">=\"");
      }
      con.bound = c.at("value").get<double>();
      spec.constraints.push_back(std::move(con));
    }
    spec.sa_gate = j.value("sa_gate", spec.sa_gate);
    spec.budget = j.value("budget", spec.budget);
    spec.seed = j.value("seed", spec.seed);
    spec.top_k = j.value("top_k", spec.top_k);
    spec.seed_limit = j.value("seed_limit", spec.seed_limit);
  } catch (const nlohmann::json::exception& e) {
    fail(e.what());
  }
  check_spec(spec);
  return spec;
}

nlohmann::json to_json(const TargetSpec& spec) {
  nlohmann::json objectives = nlohmann::json::array();
  for (const auto& o : spec.objectives) {
    nlohmann::json x{{"property", o.property_id}, {"weight", o.weight}};
    if (o.target) x["target"] = *o.target;
    if (o.range) x["range"] = {o.range->first, o.range->second};
    objectives.push_back(std::move(x));
  }
  nlohmann::json constraints = nlohmann::json::array();
  for (const auto& c : spec.constraints) {
    constraints.push_back({{"property", c.property_id}, {"bound", bound_symbol(c.kind)}, {"value", c.bound}});
  }
  return {{"objectives", std::move(objectives)}, {"constraints", std::move(constraints)},
          {"sa_gate", spec.sa_gate},             {"budget", spec.budget},
          {"seed", spec.seed},                   {"top_k", spec.top_k},
          {"seed_limit", spec.seed_limit}};
}

const nlohmann::json& target_spec_schema() {
  static const nlohmann::json kSchema = R"({
    "type": "object",
    "required": ["objectives"],
    "properties": {
      "objectives": {"type": "array", "minItems": 1, "items": {
        "type": "object", "required": ["property"],
        "properties": {
          "property": {"type": "string"},
          "target": {"type": "number"},
          "range": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
          "weight": {"type": "number", "exclusiveMinimum": 0}}}},
      "constraints": {"type": "array", "items": {
        "type": "object", "required": ["property", "bound", "value"],
        "properties": {
          "property": {"type": "string"},
          "bound": {"type": "string", "enum": ["<=", ">="]},
          "value": {"type": "number"}}}},
      "sa_gate": {"type": "number", "minimum": 1, "maximum": 10},
      "budget": {"type": "integer", "minimum": 0},
      "seed": {"type": "integer", "minimum": 0},
      "top_k": {"type": "integer", "minimum": 1},
      "seed_limit": {"type": "integer", "minimum": 1}}
  })"_json;
  return kSchema;
}

double scalarize(const PropertyVector& props, const TargetSpec& spec) {
  double total = 0;
  for (const auto& o : spec.objectives) {
    const double d = deviation(o, lookup(props, o.property_id));
    total += o.weight * d * d;
  }
  for (const auto& c : spec.constraints) {
    const double v = violation(c, lookup(props, c.property_id));
    total += kConstraintPenalty * v * v;
  }
  return total;
}

std::vector<std::string> constraint_violations(const PropertyVector& props, const TargetSpec& spec) {
  std::vector<std::string> out;
  for (const auto& c : spec.constraints) {
    const double value = lookup(props, c.property_id);
    if (violation(c, value) > 0) {
      out.push_back(c.property_id + " = " + fmt(value) + " violates " + std::string(bound_symbol(c.kind)) + " " +
                    fmt(c.bound));
    }
  }
  return out;
}

// ---------------------------------------------------------------- edits

std::span<const std::string> substituent_library() {
  static const std::vector<std::string> kLibrary = {
      "F",  "Cl",  "Br", "I",        "C",    "CC",  "O",      "N",
      "C#N", "OC", "OCC", "SC", "C(F)(F)F", "C(N)=O", "[N+](=O)[O-]", "c1ccccc1",
  };
  return kLibrary;
}

std::span<const std::string> linkage_elements() {
  static const std::vector<std::string> kElements = {"C", "N", "O", "S"};
  return kElements;
}

PolymerGraph apply_edit(const PolymerGraph& cru, const Edit& edit) {
  const std::string kind(edit_kind_name(edit.kind));
  if (edit.site < 0 || edit.site >= cru.atom_count()) {
    throw Error(ErrorCode::kInvalidEdit, kind + ": site " + std::to_string(edit.site) + " is out of range");
  }
  if (cru.atom(edit.site).is_star()) {
    throw Error(ErrorCode::kInvalidEdit, kind + ": site " + std::to_string(edit.site) + " is a star endpoint");
  }
  GraphBuilder b(cru);
  switch (edit.kind) {
    case EditKind::kAddSubstituent: {
      fragment_graph(edit.fragment);
      if (free_h(cru, edit.site) < 1) {
        throw Error(ErrorCode::kInvalidEdit, kind + ": atom " + std::to_string(edit.site) + " has no hydrogen to replace");
      }
      attach(b, edit.site, edit.fragment);
      break;
    }
    case EditKind::kRemoveSubstituent:
    case EditKind::kReplaceSubstituent: {
      if (edit.kind == EditKind::kReplaceSubstituent) fragment_graph(edit.fragment);
      auto sub = substituent_at(cru, edit.site);
      if (!sub) {
        throw Error(ErrorCode::kInvalidEdit,
                    kind + ": atom " + std::to_string(edit.site) + " does not root a substituent");
      }
      auto [parent, atoms] = *sub;
      const int shift = static_cast<int>(std::count_if(atoms.begin(), atoms.end(), [&](int a) { return a < parent; }));
      b.remove_atoms(atoms);
      parent -= shift;
      if (auto& h = b.atom(parent).explicit_h) h = *h + 1;
      if (edit.kind == EditKind::kReplaceSubstituent) attach(b, parent, edit.fragment);
      break;
    }
    case EditKind::kSwapLinkage: {
      const auto& allowed = linkage_elements();
      if (std::find(allowed.begin(), allowed.end(), edit.fragment) == allowed.end()) {
        throw Error(ErrorCode::kInvalidEdit, kind + ": '" + edit.fragment + "' is not a linkage element");
      }
      if (!is_backbone_linkage(cru, edit.site)) {
        throw Error(ErrorCode::kInvalidEdit,
                    kind + ": atom " + std::to_string(edit.site) + " is not a two-connected acyclic backbone atom");
      }
      if (cru.atom(edit.site).element == edit.fragment) {
        throw Error(ErrorCode::kInvalidEdit, kind + ": atom " + std::to_string(edit.site) + " is already " + edit.fragment);
      }
      auto& a = b.atom(edit.site);
      a.element = edit.fragment;
      a.explicit_h.reset();
      a.formal_charge = 0;
      break;
    }
  }
  return finish(b, cru);
}

std::vector<Edit> candidate_edits(const PolymerGraph& cru) {
  std::vector<Edit> out;
  for (int i = 0; i < cru.atom_count(); ++i) {
    const auto& a = cru.atom(i);
    if (a.is_star()) continue;
    if (free_h(cru, i) > 0) {
      for (const auto& f : substituent_library()) out.push_back({EditKind::kAddSubstituent, i, f});
    }
    if (substituent_at(cru, i)) {
      out.push_back({EditKind::kRemoveSubstituent, i, {}});
      for (const auto& f : substituent_library()) out.push_back({EditKind::kReplaceSubstituent, i, f});
    } else if (is_backbone_linkage(cru, i)) {
      for (const auto& e : linkage_elements()) {
        if (e != a.element) out.push_back({EditKind::kSwapLinkage, i, e});
      }
    }
  }
  return out;
}

// ----------------------------------------------------------- evaluation

void Scorer::score(CandidateRecord& record, const PolymerGraph& graph, const TargetSpec& spec) const {
  record.properties = predictor.predict(graph);
  record.sa = sa_score(graph, sa_table);
  if (sc_model) record.sc = sc_score(graph, *sc_model);
  record.objective = scalarize(record.properties, spec);
}

// ------------------------------------------------------------- optimize

std::string_view optimize_status_name(OptimizeStatus status) {
  return status == OptimizeStatus::kComplete ? "complete" : "budget_exhausted";
}

nlohmann::json to_json(const OptimizeResult& result) {
  nlohmann::json ranked = nlohmann::json::array();
  for (std::size_t i = 0; i < result.ranked.size(); ++i) {
    auto r = to_json(result.ranked[i]);
    r["violations"] = result.violations[i];
    ranked.push_back(std::move(r));
  }
  return {{"status", optimize_status_name(result.status)},
          {"best_effort", result.best_effort},
          {"exhaustive", result.exhaustive},
          {"evaluations", result.evaluations},
          {"seeds", result.seeds},
          {"ranked", std::move(ranked)}};
}

int exhaustive_size(const TargetSpec& spec, std::span<const Reactant> bag,
                    std::span<const ReactionTemplate> templates, const Scorer& scorer) {
  check_spec(spec);
  int total = 0;
  for (const auto& s : gated_seeds(spec, bag, templates, scorer, 0)) {
    total += static_cast<int>(candidate_edits(parse_psmiles(s.cru)).size());
  }
  return total;
}

OptimizeResult optimize(const TargetSpec& spec, std::span<const Reactant> bag,
                        std::span<const ReactionTemplate> templates, const Scorer& scorer, int threads) {
  check_spec(spec);
  OptimizeResult result;
  const auto seeds = gated_seeds(spec, bag, templates, scorer, threads);
  result.seeds = static_cast<int>(seeds.size());

  // Pool of every gated candidate, first occurrence wins.
  std::vector<CandidateRecord> pool;
  std::map<std::string, std::size_t> index;
  auto admit = [&](CandidateRecord rec) {
    if (*rec.sa > spec.sa_gate) return false;
    if (index.contains(rec.cru)) return true;
    index.emplace(rec.cru, pool.size());
    pool.push_back(std::move(rec));
    return true;
  };
  for (const auto& s : seeds) admit(s);

  std::vector<Proposal> sweep;
  for (const auto& s : seeds) {
    for (auto& e : candidate_edits(parse_psmiles(s.cru))) sweep.push_back({&s, std::move(e)});
  }

  if (spec.budget >= static_cast<int>(sweep.size())) {
    result.exhaustive = true;
    result.evaluations = static_cast<int>(sweep.size());
    auto outcomes = parallel_map(sweep, [&](const Proposal& p) { return evaluate_proposal(p, spec, scorer); }, threads);
    for (auto& o : outcomes) {
      if (o.applied) admit(std::move(o.record));
    }
  } else {
    result.status = OptimizeStatus::kBudgetExhausted;
    Rng rng(spec.seed);
    double lo = *seeds.front().objective, hi = lo;
    for (const auto& s : seeds) {
      lo = std::min(lo, *s.objective);
      hi = std::max(hi, *s.objective);
    }
    double temperature = hi > lo ? hi - lo : 1.0;
    CandidateRecord current = *std::min_element(seeds.begin(), seeds.end(), rank_less);
    std::map<std::string, std::vector<Edit>> moves;
    for (int step = 0; step < spec.budget; ++step) {
      auto it = moves.find(current.cru);
      if (it == moves.end()) it = moves.emplace(current.cru, candidate_edits(parse_psmiles(current.cru))).first;
      const auto& edits = it->second;
      ++result.evaluations;
      if (!edits.empty()) {
        const Edit& e = edits[rng.below(edits.size())];
        Outcome o = evaluate_proposal({&current, e}, spec, scorer);
        const double u = rng.uniform();
        if (o.applied && admit(o.record)) {
          const double delta = *o.record.objective - *current.objective;
          if (delta < 0 || u < std::exp(-delta / temperature)) current = std::move(o.record);
        }
      }
      temperature *= 0.95;
    }
  }

  std::vector<const CandidateRecord*> feasible, all;
  for (const auto& r : pool) {
    all.push_back(&r);
    if (constraint_violations(r.properties, spec).empty()) feasible.push_back(&r);
  }
  result.best_effort = feasible.empty();
  auto& chosen = result.best_effort ? all : feasible;
  std::sort(chosen.begin(), chosen.end(), [](const CandidateRecord* x, const CandidateRecord* y) { return rank_less(*x, *y); });
  for (std::size_t i = 0; i < chosen.size() && static_cast<int>(i) < spec.top_k; ++i) {
    result.ranked.push_back(*chosen[i]);
    result.violations.push_back(constraint_violations(chosen[i]->properties, spec));
  }
  return result;
}

// ----------------------------------------------------------- refinement

std::string_view verdict_name(Verdict verdict) {
  switch (verdict) {
    case Verdict::kAccepted: return "accepted";
    case Verdict::kRejectedWorse: return "rejected_worse";
    case Verdict::kRejectedInvalid: return "rejected_invalid";
    case Verdict::kRejectedGate: return "rejected_gate";
  }
  return "rejected_invalid";
}

nlohmann::json to_json(const RefinementDecision& d) {
  auto props = [](const PropertyVector& p) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : p) j[k] = v;
    return j;
  };
  nlohmann::json j{{"verdict", verdict_name(d.verdict)},
                   {"before", props(d.before)},
                   {"objective_before", d.objective_before},
                   {"objective_delta", d.objective_delta},
                   {"flag_note", d.flag_note}};
  j["after"] = d.after ? props(*d.after) : nlohmann::json(nullptr);
  j["objective_after"] = d.objective_after ? nlohmann::json(*d.objective_after) : nlohmann::json(nullptr);
  j["sa_after"] = d.sa_after ? nlohmann::json(*d.sa_after) : nlohmann::json(nullptr);
  j["result_cru"] = d.result_cru.empty() ? nlohmann::json(nullptr) : nlohmann::json(d.result_cru);
  return j;
}

RefinementDecision refine_with_edit(const PolymerGraph& cru, const Edit& edit, const TargetSpec& spec,
                                    const Scorer& scorer) {
  RefinementDecision d;
  d.before = scorer.predictor.predict(cru);
  d.objective_before = scalarize(d.before, spec);
  PolymerGraph edited;
  try {
    edited = apply_edit(cru, edit);
  } catch (const Error& e) {
    d.verdict = Verdict::kRejectedInvalid;
    d.flag_note = std::string(e.code_name()) + ": " + e.what();
    return d;
  }
  d.result_cru = canonicalize(edited);
  d.sa_after = sa_score(edited, scorer.sa_table);
  if (*d.sa_after > spec.sa_gate) {
    d.verdict = Verdict::kRejectedGate;
    d.flag_note = "SA score " + fmt(*d.sa_after) + " exceeds gate " + fmt(spec.sa_gate);
    return d;
  }
  d.after = scorer.predictor.predict(edited);
  d.objective_after = scalarize(*d.after, spec);
  d.objective_delta = *d.objective_after - d.objective_before;
  if (d.objective_delta < 0) {
    d.verdict = Verdict::kAccepted;
    return d;
  }
  d.verdict = Verdict::kRejectedWorse;
  std::vector<std::string> notes;
  for (const auto& o : spec.objectives) {
    const double b = lookup(d.before, o.property_id), a = lookup(*d.after, o.property_id);
    const double db = std::abs(deviation(o, b)), da = std::abs(deviation(o, a));
    const std::string goal = o.target ? fmt(*o.target) : "[" + fmt(o.range->first) + ", " + fmt(o.range->second) + "]";
    if (da > db) {
      notes.push_back(o.property_id + " moved away from target " + goal + " (" + fmt(b) + " -> " + fmt(a) + ")");
    } else if (da < db) {
      notes.push_back(o.property_id + " moved toward target " + goal + " (" + fmt(b) + " -> " + fmt(a) + ")");
    }
  }
  for (const auto& c : spec.constraints) {
    const double b = violation(c, lookup(d.before, c.property_id)), a = violation(c, lookup(*d.after, c.property_id));
    if (a > b) {
      notes.push_back(c.property_id + " now violates " + std::string(bound_symbol(c.kind)) + " " + fmt(c.bound) +
                      " by " + fmt(a));
    }
  }
  if (notes.empty()) notes.push_back("objective unchanged");
  for (std::size_t i = 0; i < notes.size(); ++i) d.flag_note += (i ? "; " : "") + notes[i];
  return d;
}

}  // namespace polyforge

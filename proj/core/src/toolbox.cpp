#include "polyforge/toolbox.hpp"

#include <bit>
#include <cstdlib>

#include "polyforge/crippen.hpp"
#include "polyforge/fingerprint.hpp"
#include "polyforge/json_schema.hpp"
#include "polyforge/optimizer.hpp"
#include "polyforge/text.hpp"

namespace polyforge {
namespace {

using nlohmann::json;

const json kPropertyEnum = {"PE_I", "Egb", "Eea", "EPS", "OPV"};

json smiles_field(const std::string& what) {
  return {{"type", "string"}, {"minLength", 1}, {"description", what}};
}

json head_field(const std::string& fallback) {
  return {{"type", "string"},
          {"enum", {"single", "multi"}},
          {"description", "Property head: one head per property or the shared multi-property head (default " +
                              fallback + ")"}};
}

// Search knobs shared by the optimize tools and refine_structure.
json search_fields() {
  return {{"sa_gate", {{"type", "number"}, {"minimum", 1}, {"maximum", 10}}},
          {"budget", {{"type", "integer"}, {"minimum", 0}, {"maximum", 1000000}}},
          {"seed", {{"type", "integer"}, {"minimum", 0}}},
          {"top_k", {{"type", "integer"}, {"minimum", 1}, {"maximum", 1000}}},
          {"seed_limit", {{"type", "integer"}, {"minimum", 1}, {"maximum", 5000}}}};
}

json objectives_field() {
  return {{"type", "array"},
          {"minItems", 1},
          {"items",
           {{"type", "object"},
            {"required", {"property"}},
            {"additionalProperties", false},
            {"properties",
             {{"property", {{"type", "string"}, {"enum", kPropertyEnum}}},
              {"target", {{"type", "number"}}},
              {"range", {{"type", "array"}, {"items", {{"type", "number"}}}, {"minItems", 2}, {"maxItems", 2}}},
              {"weight", {{"type", "number"}, {"exclusiveMinimum", 0}}}}}}}};
}

json constraints_field() {
  return {{"type", "array"},
          {"items",
           {{"type", "object"},
            {"required", {"property", "bound", "value"}},
            {"additionalProperties", false},
            {"properties",
             {{"property", {{"type", "string"}, {"enum", kPropertyEnum}}},
              {"bound", {{"type", "string"}, {"enum", {"<=", ">="}}}},
              {"value", {{"type", "number"}}}}}}}};
}

json object_schema(json properties, json required) {
  return {{"type", "object"},
          {"properties", std::move(properties)},
          {"required", std::move(required)},
          {"additionalProperties", false}};
}

std::vector<ToolDescriptor> build_descriptors() {
  std::vector<ToolDescriptor> out;
  out.push_back({"validate_polymer",
                 "Parse and validate a polymer SMILES string; reports star count, coded warnings and errors, and "
                 "the canonical form.",
                 object_schema({{"smiles", smiles_field("p-SMILES of a repeat unit or molecule")},
                                {"mode", {{"type", "string"}, {"enum", {"cru", "molecule"}}}}},
                               {"smiles"}),
                 false});
  out.push_back({"predict_properties",
                 "Predict conductivity (PE_I), bandgap (Egb), electron affinity (Eea), dielectric constant (EPS) "
                 "and OPV efficiency with units, out-of-range flags, Crippen logP and SA/SC scores.",
                 object_schema({{"smiles", smiles_field("p-SMILES of the repeat unit")}, {"head", head_field("single")}},
                               {"smiles"}),
                 false});
  out.push_back({"generate_polymers",
                 "Enumerate candidate repeat units by joining reactants from the bundled bag through "
                 "polymerization templates; each candidate carries predictions, SA/SC and provenance.",
                 object_schema({{"limit", {{"type", "integer"}, {"minimum", 1}, {"maximum", 1000}}},
                                {"seed", {{"type", "integer"}, {"minimum", 0}}},
                                {"templates",
                                 {{"type", "array"},
                                  {"minItems", 1},
                                  {"items",
                                   {{"type", "string"},
                                    {"enum", {"polyester", "polyamide", "polyether", "polyurethane"}}}}}},
                                {"sa_gate", {{"type", "number"}, {"minimum", 1}, {"maximum", 10}}},
                                {"head", head_field("single")}},
                               json::array()),
                 true});

  json single = search_fields();
  single["property"] = {{"type", "string"}, {"enum", kPropertyEnum}};
  single["target"] = {{"type", "number"}};
  single["range"] = {{"type", "array"}, {"items", {{"type", "number"}}}, {"minItems", 2}, {"maxItems", 2}};
  single["constraints"] = constraints_field();
  single["head"] = head_field("single");
  out.push_back({"optimize_single_property",
                 "Search seeds and single edits for repeat units whose predicted property meets a target value "
                 "or range, under an SA gate and optional property constraints.",
                 object_schema(std::move(single), {"property"}), true});

  json multi = search_fields();
  multi["objectives"] = objectives_field();
  multi["constraints"] = constraints_field();
  multi["head"] = head_field("multi");
  out.push_back({"optimize_multi_property",
                 "Search for repeat units meeting several weighted property objectives and constraints at once.",
                 object_schema(std::move(multi), {"objectives"}), true});

  json refine = {{"cru", smiles_field("repeat unit to edit")},
                 {"edit",
                  {{"type", "object"},
                   {"required", {"kind", "site"}},
                   {"additionalProperties", false},
                   {"properties",
                    {{"kind",
                      {{"type", "string"},
                       {"enum", {"add_substituent", "remove_substituent", "replace_substituent", "swap_linkage"}}}},
                     {"site", {{"type", "integer"}, {"minimum", 0}}},
                     {"fragment", {{"type", "string"}}}}}}},
                 {"objectives", objectives_field()},
                 {"constraints", constraints_field()},
                 {"sa_gate", {{"type", "number"}, {"minimum", 1}, {"maximum", 10}}},
                 {"head", head_field("single")}};
  out.push_back({"refine_structure",
                 "Apply one proposed structural edit and re-score it; the edit is accepted only if it parses, "
                 "passes the SA gate and lowers the objective.",
                 object_schema(std::move(refine), {"cru", "edit", "objectives"}), true});

  out.push_back({"score_synthesizability",
                 "Synthetic accessibility (1 easy to 10 hard) with its breakdown, and synthetic complexity (1 to 5).",
                 object_schema({{"smiles", smiles_field("p-SMILES of the repeat unit or molecule")}}, {"smiles"}),
                 false});
  out.push_back({"compute_similarity",
                 "Tanimoto and Dice similarity between two structures on Morgan or atom-pair fingerprints.",
                 object_schema({{"a", smiles_field("first structure")},
                                {"b", smiles_field("second structure")},
                                {"fingerprint", {{"type", "string"}, {"enum", {"morgan", "atom_pair"}}}},
                                {"radius", {{"type", "integer"}, {"minimum", 0}, {"maximum", 5}}},
                                {"n_bits", {{"type", "integer"}, {"minimum", 64}, {"maximum", 16384}}}},
                               {"a", "b"}),
                 false});
  return out;
}

json property_block(const PropertyVector& values) {
  json out = json::object();
  const auto flagged = out_of_range(values);
  for (const auto& [id, v] : values) {
    const auto& spec = property_spec(id);
    out[id] = {{"value", v},
               {"units", spec.units},
               {"name", spec.display_name},
               {"out_of_range", std::find(flagged.begin(), flagged.end(), id) != flagged.end()}};
    if (const auto d = display_value(id, v)) out[id]["display"] = {{"value", d->value}, {"units", d->units}};
  }
  return out;
}

json diagnostic_json(const Diagnostic& d) {
  json j{{"code", d.code}, {"message", d.message}};
  j["atom"] = d.atom ? json(*d.atom) : json(nullptr);
  return j;
}

TargetSpec spec_from_args(const json& args) {
  json spec = json::object();
  for (const char* key : {"objectives", "constraints", "sa_gate", "budget", "seed", "top_k", "seed_limit"}) {
    if (args.contains(key)) spec[key] = args[key];
  }
  return target_spec_from_json(spec);
}

std::string env_or(const char* name, const char* fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

}  // namespace

std::span<const ToolDescriptor> tool_descriptors() {
  static const auto kTools = build_descriptors();
  return kTools;
}

const ToolDescriptor* find_tool(std::string_view name) {
  for (const auto& t : tool_descriptors()) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

nlohmann::json to_json(const ValidationReport& report) {
  json warnings = json::array();
  json errors = json::array();
  for (const auto& d : report.warnings) warnings.push_back(diagnostic_json(d));
  for (const auto& d : report.errors) errors.push_back(diagnostic_json(d));
  return {{"is_valid", report.is_valid},
          {"star_count", report.star_count},
          {"warnings", std::move(warnings)},
          {"errors", std::move(errors)}};
}

nlohmann::json units_json(const PropertyVector& values) {
  json out = json::object();
  for (const auto& [id, v] : values) out[id] = property_spec(id).units;
  return out;
}

nlohmann::json database_stats_json(const CruDatabase& db) {
  json out = to_json(stats(db));
  out["skipped"] = db.skipped();
  out["corpus_hash"] = db.corpus_hash();
  return out;
}

std::string_view sa_band(double sa) {
  if (sa <= 3.0) return "easy";
  if (sa > 6.0) return "hard";
  return "moderate";
}

ToolboxPaths ToolboxPaths::from_environment() {
  ToolboxPaths p;
  p.data_dir = env_or("POLYFORGE_DATA_DIR", POLYFORGE_DEFAULT_DATA_DIR);
  p.models_dir = env_or("POLYFORGE_MODELS_DIR", POLYFORGE_DEFAULT_MODELS_DIR);
  return p;
}

Toolbox Toolbox::load(const ToolboxPaths& paths) {
  Toolbox tb;
  const auto parse_file = [](const std::filesystem::path& path) {
    auto j = json::parse(read_file(path.string()), nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::kSchemaMismatch, path.string() + ": invalid JSON");
    return j;
  };
  tb.sa_table_ = std::make_shared<FragmentScoreTable>(fragment_table_from_json(parse_file(paths.data_dir / "sa_fragments.json")));
  tb.sc_model_ = std::make_shared<ScScoreModel>(sc_model_from_json(parse_file(paths.data_dir / "sc_model.json")));

  std::vector<RegressionHead> singles;
  for (const auto& id : target_property_ids()) singles.push_back(load_head((paths.models_dir / (id + ".head.json")).string()));
  tb.single_ = std::make_shared<HeadPredictor>(std::move(singles));
  tb.multi_ = std::make_shared<HeadPredictor>(std::vector<RegressionHead>{load_head((paths.models_dir / "multi.head.json").string())});

  tb.bag_ = load_reactant_bag(paths.bag_path.value_or(paths.data_dir / "reactant_bag.jsonl"));
  tb.db_ = std::make_shared<CruDatabase>(CruDatabase::ingest(paths.db_path.value_or(paths.data_dir / "fixture_labeled.csv"),
                                                             IngestScorers{tb.sa_table_.get(), tb.sc_model_.get()}));
  return tb;
}

const Predictor& Toolbox::predictor(std::string_view head) const {
  if (head == "multi") return *multi_;
  return *single_;
}

nlohmann::json Toolbox::call(std::string_view name, const nlohmann::json& arguments) const {
  const auto* tool = find_tool(name);
  if (!tool) throw Error(ErrorCode::kUnknownTool, "unknown tool '" + std::string(name) + "'");
  require_schema(tool->input_schema, arguments);
  if (name == "validate_polymer") return validate_polymer(arguments);
  if (name == "predict_properties") return predict_properties(arguments);
  if (name == "generate_polymers") return generate_polymers(arguments);
  if (name == "optimize_single_property") return optimize_single_property(arguments);
  if (name == "optimize_multi_property") return optimize_multi_property(arguments);
  if (name == "refine_structure") return refine_structure(arguments);
  if (name == "score_synthesizability") return score_synthesizability(arguments);
  return compute_similarity(arguments);
}

nlohmann::json Toolbox::validate_polymer(const json& args) const {
  const auto smiles = args["smiles"].get<std::string>();
  const auto mode_name = args.value("mode", std::string("cru"));
  const auto mode = mode_name == "molecule" ? ValidationMode::kMolecule : ValidationMode::kCru;
  const auto report = validate_text(smiles, mode);
  json out{{"smiles", smiles}, {"mode", mode_name}};
  out.update(to_json(report));
  out["canonical"] = report.is_valid ? json(canonical_smiles(smiles)) : json(nullptr);
  return out;
}

nlohmann::json Toolbox::predict_properties(const json& args) const {
  const auto smiles = args["smiles"].get<std::string>();
  const auto head = args.value("head", std::string("single"));
  const auto graph = parse_psmiles(smiles);
  require_valid(graph);
  const auto values = predictor(head).predict(graph);
  const double logp = crippen_logp(graph);
  return {{"smiles", smiles},
          {"canonical", canonicalize(graph)},
          {"head", head},
          {"properties", property_block(values)},
          {"out_of_range", out_of_range(values)},
          {"logP", property_block({{"logP", logp}})["logP"]},
          {"sa", sa_score(graph, *sa_table_)},
          {"sc", sc_score(graph, *sc_model_)}};
}

nlohmann::json Toolbox::generate_polymers(const json& args) const {
  const int limit = args.value("limit", 20);
  const auto seed = args.value("seed", std::uint64_t{42});
  const double gate = args.value("sa_gate", 10.0);
  const auto head = args.value("head", std::string("single"));
  std::vector<ReactionTemplate> templates;
  if (args.contains("templates")) {
    for (const auto& id : args["templates"]) templates.push_back(find_template(id.get<std::string>()));
  } else {
    templates.assign(template_library().begin(), template_library().end());
  }
  auto records = enumerate_candidates(bag_, templates, limit, seed);
  json candidates = json::array();
  int gated = 0;
  for (auto& r : records) {
    const auto graph = parse_psmiles(r.cru);
    r.properties = predictor(head).predict(graph);
    r.sa = sa_score(graph, *sa_table_);
    r.sc = sc_score(graph, *sc_model_);
    if (*r.sa > gate) {
      ++gated;
      continue;
    }
    candidates.push_back(to_json(r));
  }
  json template_ids = json::array();
  for (const auto& t : templates) template_ids.push_back(t.id);
  return {{"count", candidates.size()}, {"gated_out", gated},  {"seed", seed},
          {"sa_gate", gate},            {"head", head},       {"templates", std::move(template_ids)},
          {"bag_size", bag_.size()},    {"units", units_json(records.empty() ? PropertyVector{} : records.front().properties)},
          {"candidates", std::move(candidates)}};
}

nlohmann::json Toolbox::optimize_single_property(const json& args) const {
  json objective{{"property", args["property"]}};
  if (args.contains("target")) objective["target"] = args["target"];
  if (args.contains("range")) objective["range"] = args["range"];
  json multi = args;
  multi.erase("property");
  multi.erase("target");
  multi.erase("range");
  multi["objectives"] = json::array({objective});
  if (!multi.contains("head")) multi["head"] = "single";
  return optimize_multi_property(multi);
}

nlohmann::json Toolbox::optimize_multi_property(const json& args) const {
  const auto spec = spec_from_args(args);
  const auto head = args.value("head", std::string("multi"));
  const Scorer scorer{predictor(head), *sa_table_, sc_model_.get()};
  const auto result = optimize(spec, bag_, template_library(), scorer);
  json out = to_json(result);
  out["spec"] = to_json(spec);
  out["head"] = head;
  out["units"] = units_json(result.ranked.empty() ? PropertyVector{} : result.ranked.front().properties);
  return out;
}

nlohmann::json Toolbox::refine_structure(const json& args) const {
  auto spec = spec_from_args(args);
  const auto head = args.value("head", std::string("single"));
  const auto cru = parse_psmiles(args["cru"].get<std::string>());
  require_valid(cru);
  const auto edit = edit_from_json(args["edit"]);
  const Scorer scorer{predictor(head), *sa_table_, sc_model_.get()};
  const auto decision = refine_with_edit(cru, edit, spec, scorer);
  json out = to_json(decision);
  out["cru"] = canonicalize(cru);
  out["edit"] = to_json(edit);
  out["head"] = head;
  out["out_of_range_before"] = out_of_range(decision.before);
  out["out_of_range_after"] = decision.after ? json(out_of_range(*decision.after)) : json(nullptr);
  out["units"] = units_json(decision.before);
  return out;
}

nlohmann::json Toolbox::score_synthesizability(const json& args) const {
  const auto smiles = args["smiles"].get<std::string>();
  const auto graph = parse_psmiles(smiles);
  require_valid(graph);
  const auto b = sa_breakdown(graph, *sa_table_);
  return {{"smiles", smiles},
          {"canonical", canonicalize(graph)},
          {"sa", b.score},
          {"sa_band", sa_band(b.score)},
          {"sa_breakdown",
           {{"fragment_score", b.fragment_score},
            {"size_penalty", b.size_penalty},
            {"spiro_penalty", b.spiro_penalty},
            {"bridge_penalty", b.bridge_penalty},
            {"macrocycle_penalty", b.macrocycle_penalty},
            {"symmetry_correction", b.symmetry_correction},
            {"raw", b.raw}}},
          {"sc", sc_score(graph, *sc_model_)}};
}

nlohmann::json Toolbox::compute_similarity(const json& args) const {
  const auto a_text = args["a"].get<std::string>();
  const auto b_text = args["b"].get<std::string>();
  const auto kind = args.value("fingerprint", std::string("morgan"));
  const int radius = args.value("radius", kDefaultMorganRadius);
  const int n_bits = args.value("n_bits", kDefaultFingerprintBits);
  const auto a = parse_psmiles(a_text);
  const auto b = parse_psmiles(b_text);
  const auto fp = [&](const PolymerGraph& g) {
    return kind == "atom_pair" ? atom_pair_fingerprint(g, n_bits) : morgan_fingerprint(g, radius, n_bits);
  };
  const auto fa = fp(a);
  const auto fb = fp(b);
  int common = 0;
  for (std::size_t w = 0; w < fa.words.size(); ++w) common += std::popcount(fa.words[w] & fb.words[w]);
  json out{{"a", a_text}, {"b", b_text}, {"fingerprint", kind}, {"n_bits", n_bits}};
  out["radius"] = kind == "morgan" ? json(radius) : json(nullptr);
  out["bits_a"] = fa.popcount();
  out["bits_b"] = fb.popcount();
  out["common_bits"] = common;
  out["tanimoto"] = tanimoto(fa, fb);
  out["dice"] = dice(fa, fb);
  return out;
}

}  // namespace polyforge

// polyforge command-line front end. Every tool subcommand builds the same
// argument object the tool server receives and prints the same payload.
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "polyforge/json_schema.hpp"
#include "polyforge/mcp.hpp"
#include "polyforge/polymer_db.hpp"
#include "polyforge/property_model.hpp"
#include "polyforge/text.hpp"
#include "polyforge/toolbox.hpp"
#include "render.hpp"

using nlohmann::json;
using namespace polyforge;

namespace {

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct Globals {
  std::string format = "json";
  std::string models;
  std::string db;
  std::string bag;
};

ToolboxPaths paths_for(const Globals& g) {
  auto p = ToolboxPaths::from_environment();
  if (!g.models.empty()) p.models_dir = g.models;
  if (!g.db.empty()) p.db_path = g.db;
  if (!g.bag.empty()) p.bag_path = g.bag;
  return p;
}

void emit(const json& payload, const std::string& format) {
  if (format == "csv") {
    std::cout << cli::render_csv(payload);
  } else if (format == "table") {
    std::cout << cli::render_table(payload);
  } else {
    std::cout << cli::render_json(payload);
  }
}

json error_json(const Error& e) {
  json err{{"code", e.code_name()}, {"message", e.what()}};
  if (const auto* sv = dynamic_cast<const SchemaViolation*>(&e)) {
    json fields = json::array();
    for (const auto& i : sv->issues()) fields.push_back({{"field", i.path}, {"message", i.message}});
    err["fields"] = std::move(fields);
  }
  return {{"error", std::move(err)}};
}

// Inline JSON when the text starts with '{', otherwise a file path.
json json_argument(const std::string& text, const std::string& flag) {
  std::string body = text;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || text[first] != '{') body = read_file(text);
  auto j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kInvalidArgument, flag + ": not valid JSON");
  return j;
}

// "Egb<=4" -> {"property": "Egb", "bound": "<=", "value": 4}
json parse_constraint(const std::string& text) {
  for (const char* op : {"<=", ">="}) {
    const auto pos = text.find(op);
    if (pos == std::string::npos) continue;
    try {
      std::size_t used = 0;
      const std::string rhs = text.substr(pos + 2);
      const double v = std::stod(rhs, &used);
      if (used == rhs.size()) return {{"property", text.substr(0, pos)}, {"bound", op}, {"value", v}};
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "--constraint expects PROPERTY<=VALUE or PROPERTY>=VALUE, got '" + text + "'");
}

int serve(const Globals& g, bool no_confirm, const std::string& protocol, const std::string& level) {
  auto logger = spdlog::stderr_color_st("polyforge");
  logger->set_level(spdlog::level::from_str(level));
  logger->set_pattern("[%H:%M:%S.%e] [%l] %v");
  const auto toolbox = Toolbox::load(paths_for(g));
  McpOptions options;
  options.confirm = !no_confirm;
  options.protocol_version = protocol;
  McpSession session(toolbox, options);
  session.set_logger([&](LogLevel lvl, const std::string& msg) {
    switch (lvl) {
      case LogLevel::kDebug: logger->debug(msg); break;
      case LogLevel::kInfo: logger->info(msg); break;
      case LogLevel::kWarn: logger->warn(msg); break;
      case LogLevel::kError: logger->error(msg); break;
    }
  });
  logger->info("serving {} tools on stdio (confirmation {})", tool_descriptors().size(), no_confirm ? "off" : "on");
  std::string line;
  while (std::getline(std::cin, line)) {
    if (auto reply = session.handle_line(line)) {
      std::cout << *reply << '\n';
      std::cout.flush();
    }
  }
  logger->info("stdin closed after {} tool calls", session.history().size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  CLI::App app{"polyforge: polymer repeat-unit design engine"};
  app.set_version_flag("--version", "polyforge 0.1.0");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv", "table"}))->capture_default_str();
  app.add_option("--models", g.models, "Directory with <property>.head.json and multi.head.json");
  app.add_option("--db", g.db, "Polymer database (CSV or JSONL)");

  std::function<int()> action;
  // Runs a tool through the shared toolbox and prints its payload.
  auto tool = [&](std::string name, std::function<json()> build) {
    action = [&g, name = std::move(name), build = std::move(build)]() {
      const auto toolbox = Toolbox::load(paths_for(g));
      const auto payload = toolbox.call(name, build());
      emit(payload, g.format);
      if (name == "validate_polymer" && !payload["is_valid"].get<bool>()) return kExitDomain;
      return 0;
    };
  };

  // validate
  auto* validate = app.add_subcommand("validate", "Parse and validate a p-SMILES string");
  std::string v_smiles, v_mode = "cru";
  validate->add_option("smiles", v_smiles, "p-SMILES text")->required();
  validate->add_option("--mode", v_mode, "Validation mode")->check(CLI::IsMember({"cru", "molecule"}))->capture_default_str();
  validate->callback([&] { tool("validate_polymer", [&] { return json{{"smiles", v_smiles}, {"mode", v_mode}}; }); });

  // predict
  auto* predict = app.add_subcommand("predict", "Predict the five registry properties, logP and SA/SC");
  std::string p_smiles, p_head = "single";
  predict->add_option("smiles", p_smiles, "p-SMILES of the repeat unit")->required();
  predict->add_option("--head", p_head, "Property head")->check(CLI::IsMember({"single", "multi"}))->capture_default_str();
  predict->callback([&] { tool("predict_properties", [&] { return json{{"smiles", p_smiles}, {"head", p_head}}; }); });

  // similarity
  auto* similarity = app.add_subcommand("similarity", "Tanimoto and Dice similarity of two structures");
  std::string s_a, s_b, s_fp = "morgan";
  int s_radius = 2, s_bits = 2048;
  similarity->add_option("a", s_a, "First structure")->required();
  similarity->add_option("b", s_b, "Second structure")->required();
  similarity->add_option("--fingerprint", s_fp, "Fingerprint family")
      ->check(CLI::IsMember({"morgan", "atom_pair"}))
      ->capture_default_str();
  similarity->add_option("--radius", s_radius, "Morgan radius")->capture_default_str();
  similarity->add_option("--n-bits", s_bits, "Folded fingerprint width")->capture_default_str();
  similarity->callback([&] {
    tool("compute_similarity", [&] {
      json args{{"a", s_a}, {"b", s_b}, {"fingerprint", s_fp}, {"n_bits", s_bits}};
      if (s_fp == "morgan") args["radius"] = s_radius;
      return args;
    });
  });

  // score
  auto* score = app.add_subcommand("score", "Synthetic accessibility and complexity scores");
  std::string sc_smiles;
  score->add_option("smiles", sc_smiles, "p-SMILES text")->required();
  score->callback([&] { tool("score_synthesizability", [&] { return json{{"smiles", sc_smiles}}; }); });

  // generate
  auto* generate = app.add_subcommand("generate", "Enumerate candidate repeat units from a reactant bag");
  int gen_limit = 20;
  std::uint64_t gen_seed = 42;
  double gen_gate = 10.0;
  std::vector<std::string> gen_templates;
  std::string gen_head = "single";
  generate->add_option("--bag", g.bag, "Reactant bag (JSONL); defaults to the bundled bag");
  generate->add_option("--limit", gen_limit, "Maximum number of enumerated CRUs")->capture_default_str();
  generate->add_option("--seed", gen_seed, "Shuffle seed")->capture_default_str();
  generate->add_option("--template", gen_templates, "Restrict to these templates (repeatable)")
      ->check(CLI::IsMember({"polyester", "polyamide", "polyether", "polyurethane"}));
  generate->add_option("--sa-gate", gen_gate, "Drop candidates with SA above this")->capture_default_str();
  generate->add_option("--head", gen_head, "Property head")->check(CLI::IsMember({"single", "multi"}))->capture_default_str();
  generate->callback([&] {
    tool("generate_polymers", [&] {
      json args{{"limit", gen_limit}, {"seed", gen_seed}, {"sa_gate", gen_gate}, {"head", gen_head}};
      if (!gen_templates.empty()) args["templates"] = gen_templates;
      return args;
    });
  });

  // optimize
  auto* optimize = app.add_subcommand("optimize", "Property-targeted search over seeds and single edits");
  std::string o_spec, o_property, o_head;
  std::optional<double> o_target;
  std::vector<double> o_range;
  std::vector<std::string> o_constraints;
  std::optional<std::uint64_t> o_seed;
  std::optional<int> o_budget, o_top_k, o_seed_limit;
  std::optional<double> o_gate;
  auto* spec_opt = optimize->add_option("--spec", o_spec, "Target spec JSON (file or inline); runs the multi-property tool");
  auto* prop_opt = optimize->add_option("--property", o_property, "Single property to steer")
                       ->check(CLI::IsMember({"PE_I", "Egb", "Eea", "EPS", "OPV"}));
  spec_opt->excludes(prop_opt);
  optimize->add_option("--target", o_target, "Target value for --property")->needs(prop_opt);
  optimize->add_option("--range", o_range, "Target range LO HI for --property")->expected(2)->needs(prop_opt);
  optimize->add_option("--constraint", o_constraints, "Constraint such as Egb<=4 (repeatable)");
  optimize->add_option("--seed", o_seed, "Search seed (overrides --spec)");
  optimize->add_option("--budget", o_budget, "Edit evaluations (overrides --spec)");
  optimize->add_option("--top-k", o_top_k, "Ranked candidates to return");
  optimize->add_option("--seed-limit", o_seed_limit, "Enumerated seeds");
  optimize->add_option("--sa-gate", o_gate, "SA gate");
  optimize->add_option("--head", o_head, "Property head (default: single for --property, multi for --spec)")
      ->check(CLI::IsMember({"single", "multi"}));
  optimize->callback([&] {
    if (o_spec.empty() && o_property.empty()) throw CLI::RequiredError("--spec or --property");
    const bool single = o_spec.empty();
    tool(single ? "optimize_single_property" : "optimize_multi_property", [&, single] {
      json args = single ? json{{"property", o_property}} : json_argument(o_spec, "--spec");
      if (!args.is_object()) throw Error(ErrorCode::kInvalidArgument, "--spec must be a JSON object");
      if (o_target) args["target"] = *o_target;
      if (!o_range.empty()) args["range"] = o_range;
      for (const auto& c : o_constraints) {
        if (!args.contains("constraints")) args["constraints"] = json::array();
        args["constraints"].push_back(parse_constraint(c));
      }
      if (o_seed) args["seed"] = *o_seed;
      if (o_budget) args["budget"] = *o_budget;
      if (o_top_k) args["top_k"] = *o_top_k;
      if (o_seed_limit) args["seed_limit"] = *o_seed_limit;
      if (o_gate) args["sa_gate"] = *o_gate;
      if (!o_head.empty()) args["head"] = o_head;
      return args;
    });
  });

  // refine
  auto* refine = app.add_subcommand("refine", "Apply one edit and accept it only if the objective improves");
  std::string r_cru, r_edit, r_spec, r_head;
  refine->add_option("--cru", r_cru, "Repeat unit to edit")->required();
  refine->add_option("--edit", r_edit, "Edit JSON {kind, site, fragment} (file or inline)")->required();
  refine->add_option("--spec", r_spec, "Target spec JSON with objectives/constraints/sa_gate (file or inline)")->required();
  refine->add_option("--head", r_head, "Property head")->check(CLI::IsMember({"single", "multi"}));
  refine->callback([&] {
    tool("refine_structure", [&] {
      json args = json_argument(r_spec, "--spec");
      if (!args.is_object()) throw Error(ErrorCode::kInvalidArgument, "--spec must be a JSON object");
      // Search knobs in a shared spec file do not apply to a single edit.
      for (const char* k : {"budget", "seed", "top_k", "seed_limit"}) args.erase(k);
      args["cru"] = r_cru;
      args["edit"] = json_argument(r_edit, "--edit");
      if (!r_head.empty()) args["head"] = r_head;
      return args;
    });
  });

  // db
  auto* db = app.add_subcommand("db", "Inspect the polymer database");
  db->require_subcommand(1);
  auto* db_stats = db->add_subcommand("stats", "Record counts, property summaries and SA histogram");
  db_stats->callback([&] {
    action = [&] {
      emit(database_stats_json(Toolbox::load(paths_for(g)).database()), g.format);
      return 0;
    };
  });
  auto* db_query = db->add_subcommand("query", "Records with a property inside [min, max]");
  std::string q_prop;
  double q_min = -1e300, q_max = 1e300;
  std::size_t q_limit = 0;
  db_query->add_option("--property", q_prop, "Property id")->required();
  db_query->add_option("--min", q_min, "Lower bound (inclusive)");
  db_query->add_option("--max", q_max, "Upper bound (inclusive)");
  db_query->add_option("--limit", q_limit, "Maximum records (0 = all)")->capture_default_str();
  db_query->callback([&] {
    action = [&] {
      const auto tb = Toolbox::load(paths_for(g));
      json records = json::array();
      for (const auto& r : tb.database().query(q_prop, q_min, q_max, q_limit)) records.push_back(to_json(r));
      json out{{"property", q_prop}, {"units", property_spec(q_prop).units}, {"count", records.size()}};
      out["min"] = q_min;
      out["max"] = q_max;
      out["records"] = std::move(records);
      emit(out, g.format);
      return 0;
    };
  });
  auto* db_pca = db->add_subcommand("pca", "Project records onto principal components of the feature space");
  int pca_k = 2;
  db_pca->add_option("--k", pca_k, "Number of components")->check(CLI::IsMember({2, 3}))->capture_default_str();
  db_pca->callback([&] {
    action = [&] {
      const auto tb = Toolbox::load(paths_for(g));
      const auto res = pca_projection(tb.database(), pca_k);
      if (g.format == "csv") {
        std::cout << pca_csv(tb.database(), res);
        return 0;
      }
      json points = json::array();
      for (std::size_t i = 0; i < res.coordinates.size(); ++i) {
        points.push_back({{"cru", tb.database().records()[i].cru}, {"pc", res.coordinates[i]}});
      }
      emit({{"k", res.k}, {"explained_variance_ratio", res.explained_variance_ratio}, {"points", std::move(points)}},
           g.format);
      return 0;
    };
  });

  // train
  auto* train = app.add_subcommand("train", "Fit a ridge regression head on a labeled dataset");
  std::string t_data, t_out;
  std::vector<std::string> t_props;
  double t_lambda = kDefaultRidgeLambda;
  train->add_option("--data", t_data, "Labeled CSV or JSONL")->required();
  train->add_option("--props", t_props, "Property ids (comma separated or repeated)")->required()->delimiter(',');
  train->add_option("--lambda", t_lambda, "Ridge penalty")->capture_default_str();
  train->add_option("--out", t_out, "Write the head JSON here");
  train->callback([&] {
    action = [&] {
      const auto ds = load_dataset(t_data);
      const auto head = train_head(ds.rows, t_props, t_lambda);
      if (!t_out.empty()) save_head(head, t_out);
      json out{{"kind", head.property_ids.size() == 1 ? "single" : "multi"},
               {"property_ids", head.property_ids},
               {"rows", head.training_rows},
               {"skipped", ds.skipped},
               {"ridge_lambda", head.ridge_lambda},
               {"training_fingerprint", head.training_fingerprint}};
      json loss = json::object();
      for (std::size_t k = 0; k < head.property_ids.size(); ++k) loss[head.property_ids[k]] = head.training_loss[k];
      out["training_mse"] = std::move(loss);
      out["out"] = t_out.empty() ? json(nullptr) : json(t_out);
      emit(out, g.format);
      return 0;
    };
  });

  // serve
  auto* srv = app.add_subcommand("serve", "Run the MCP tool server on stdio");
  bool no_confirm = false;
  std::string protocol{kDefaultProtocolVersion}, log_level = "warn";
  srv->add_flag("--no-confirm", no_confirm, "Run side-effecting tools without a confirmation round-trip");
  srv->add_option("--protocol-version", protocol, "Protocol version announced at initialize")->capture_default_str();
  srv->add_option("--log-level", log_level, "stderr log level")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}))
      ->capture_default_str();
  srv->callback([&] { action = [&] { return serve(g, no_confirm, protocol, log_level); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    return action();
  } catch (const Error& e) {
    std::cerr << "polyforge: " << e.code_name() << ": " << e.what() << "\n";
    if (g.format == "json") std::cout << cli::render_json(error_json(e));
    return kExitDomain;
  } catch (const CLI::ParseError& e) {
    std::cerr << "polyforge: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "polyforge: " << e.what() << "\n";
    return kExitDomain;
  }
}

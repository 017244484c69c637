#include "polyforge/mcp.hpp"

#include <charconv>

#include "polyforge/hash.hpp"
#include "polyforge/json_schema.hpp"
#include "polyforge/polymer_db.hpp"
#include "polyforge/text.hpp"

namespace polyforge {
namespace {

using nlohmann::json;

constexpr std::string_view kServerVersion = "0.1.0";
constexpr std::string_view kStatsUri = "polyforge://db/stats";
constexpr std::string_view kRecordsPrefix = "polyforge://db/records?page=";
constexpr std::string_view kHistoryUri = "polyforge://session/history";

// Thrown inside dispatch to produce a JSON-RPC error object.
struct RpcFailure {
  int code;
  std::string message;
  json data;
};

json rpc_error(const json& id, int code, const std::string& message, const json& data = nullptr) {
  json err{{"code", code}, {"message", message}};
  if (!data.is_null()) err["data"] = data;
  return {{"jsonrpc", "2.0"}, {"id", id}, {"error", std::move(err)}};
}

json text_content(const json& payload) { return json::array({{{"type", "text"}, {"text", to_wire(payload)}}}); }

json tool_result(const json& structured, bool is_error) {
  return {{"content", text_content(structured)}, {"structuredContent", structured}, {"isError", is_error}};
}

json error_payload(const Error& e) {
  json err{{"code", e.code_name()}, {"message", e.what()}};
  if (const auto* sv = dynamic_cast<const SchemaViolation*>(&e)) {
    json fields = json::array();
    for (const auto& issue : sv->issues()) fields.push_back({{"field", issue.path}, {"message", issue.message}});
    err["fields"] = std::move(fields);
  }
  return {{"status", "error"}, {"error", std::move(err)}};
}

struct PromptSpec {
  std::string name;
  std::string description;
  std::vector<std::pair<std::string, std::string>> arguments;  // all required
  std::string text;  // {arg} placeholders
};

const std::vector<PromptSpec>& prompt_specs() {
  static const std::vector<PromptSpec> kPrompts{
      {"design_single_property",
       "Generate candidates, optimize one property toward a target and report the best repeat units.",
       {{"property", "Property id: PE_I, Egb, Eea, EPS or OPV"}, {"target", "Target value in registry units"}},
       "Design polymer repeat units with a predicted {property} of {target}. First call generate_polymers to "
       "see the candidate space, then call optimize_single_property with property {property} and target "
       "{target}. Confirm each side-effecting call before it runs. For the top candidates report the p-SMILES, "
       "every predicted property with its unit, the SA and SC scores and the provenance, and validate each "
       "reported structure with validate_polymer."},
      {"design_constrained",
       "Optimize one property toward a target while keeping a second property inside a bound.",
       {{"property", "Property id to steer"},
        {"target", "Target value"},
        {"constraint_property", "Property id to bound"},
        {"bound", "<= or >="},
        {"value", "Bound value"}},
       "Target {property} of {target} but maintain {constraint_property} {bound} {value}. Call "
       "optimize_multi_property with one objective ({property}, target {target}) and one constraint "
       "({constraint_property} {bound} {value}). Report whether the result is best_effort, list any "
       "constraint violations, and compare the winner with the unconstrained optimum from "
       "optimize_single_property."},
      {"refine_candidate",
       "Propose structural edits to a repeat unit and keep only those the predictor confirms.",
       {{"cru", "Starting repeat unit (p-SMILES)"}, {"property", "Property id to steer"}, {"target", "Target value"}},
       "Starting from {cru}, propose one structural edit at a time (add_substituent, remove_substituent, "
       "replace_substituent or swap_linkage) that should move {property} toward {target}. Submit every edit "
       "through refine_structure and keep it only when the verdict is accepted. When an edit is rejected, read "
       "its flag_note, explain the misstep and try a different edit. Stop after three consecutive rejections."},
      {"validate_and_compare",
       "Validate a structure, predict its properties and compare it with a reference structure.",
       {{"smiles", "Structure to check"}, {"reference", "Reference structure for similarity"}},
       "Validate {smiles} with validate_polymer. If it is valid, call predict_properties and "
       "score_synthesizability on it, then compute_similarity between {smiles} and {reference}. Report the "
       "values with units and flag any out-of-range prediction."},
  };
  return kPrompts;
}

std::string fill(std::string text, const json& args) {
  for (const auto& [key, value] : args.items()) {
    const std::string needle = "{" + key + "}";
    const std::string repl = value.is_string() ? value.get<std::string>() : value.dump();
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + repl.size())) {
      text.replace(pos, needle.size(), repl);
    }
  }
  return text;
}

const json& params_object(const json& params) {
  if (!params.is_object()) throw RpcFailure{rpc::kInvalidParams, "params must be an object", nullptr};
  return params;
}

std::string string_param(const json& params, const char* key) {
  const auto it = params.find(key);
  if (it == params.end() || !it->is_string()) {
    throw RpcFailure{rpc::kInvalidParams, std::string("params.") + key + " must be a string", nullptr};
  }
  return it->get<std::string>();
}

}  // namespace

std::string to_wire(const nlohmann::json& message) {
  return message.dump(-1, ' ', false, json::error_handler_t::replace);
}

McpSession::McpSession(const Toolbox& toolbox, McpOptions options)
    : toolbox_(toolbox), options_(std::move(options)), negotiated_version_(options_.protocol_version) {}

void McpSession::log(LogLevel level, const std::string& msg) const {
  if (logger_) logger_(level, msg);
}

std::optional<std::string> McpSession::handle_line(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
  if (line.find_first_not_of(" \t") == std::string_view::npos) return std::nullopt;
  json message;
  try {
    message = json::parse(line);
  } catch (const json::exception& e) {
    log(LogLevel::kWarn, std::string("parse error: ") + e.what());
    return to_wire(rpc_error(nullptr, rpc::kParseError, "Parse error"));
  }
  auto reply = handle(message);
  if (!reply) return std::nullopt;
  return to_wire(*reply);
}

std::optional<nlohmann::json> McpSession::handle(const nlohmann::json& message) {
  if (message.is_array()) {
    if (message.empty()) return rpc_error(nullptr, rpc::kInvalidRequest, "Invalid Request: empty batch");
    json replies = json::array();
    for (const auto& m : message) {
      if (auto r = handle_one(m)) replies.push_back(std::move(*r));
    }
    if (replies.empty()) return std::nullopt;
    return replies;
  }
  return handle_one(message);
}

std::optional<nlohmann::json> McpSession::handle_one(const nlohmann::json& message) {
  if (!message.is_object()) return rpc_error(nullptr, rpc::kInvalidRequest, "Invalid Request: expected an object");
  const auto id_it = message.find("id");
  const bool has_id = id_it != message.end();
  json id = has_id ? *id_it : json(nullptr);
  if (has_id && !id.is_string() && !id.is_number_integer() && !id.is_null()) {
    return rpc_error(nullptr, rpc::kInvalidRequest, "Invalid Request: id must be a string or integer");
  }
  const auto method_it = message.find("method");
  if (message.value("jsonrpc", json()) != "2.0" || method_it == message.end() || !method_it->is_string()) {
    // Responses from the client (no method) carry nothing for this server.
    if (method_it == message.end() && (message.contains("result") || message.contains("error"))) return std::nullopt;
    return rpc_error(id, rpc::kInvalidRequest, "Invalid Request");
  }
  const auto method = method_it->get<std::string>();
  const json params = message.value("params", json::object());
  log(LogLevel::kDebug, "<- " + method + (has_id ? " id=" + to_wire(id) : std::string(" (notification)")));
  if (!has_id) {
    // Notifications never get a reply, whatever they contain.
    if (method.rfind("notifications/", 0) != 0) log(LogLevel::kWarn, "ignoring notification " + method);
    return std::nullopt;
  }
  try {
    json result = method == "tools/call" ? tools_call(id, params) : dispatch(method, params);
    return json{{"jsonrpc", "2.0"}, {"id", id}, {"result", std::move(result)}};
  } catch (const RpcFailure& f) {
    log(LogLevel::kInfo, "error " + std::to_string(f.code) + " for " + method + ": " + f.message);
    return rpc_error(id, f.code, f.message, f.data);
  } catch (const std::exception& e) {
    log(LogLevel::kError, "internal error in " + method + ": " + e.what());
    return rpc_error(id, rpc::kInternalError, "Internal error");
  }
}

nlohmann::json McpSession::dispatch(const std::string& method, const nlohmann::json& params) {
  if (method == "initialize") return initialize(params_object(params));
  if (method == "ping") return json::object();
  if (method == "tools/list") return tools_list();
  if (method == "resources/list") return resources_list();
  if (method == "resources/templates/list") return resource_templates_list();
  if (method == "resources/read") return resources_read(params_object(params));
  if (method == "prompts/list") return prompts_list();
  if (method == "prompts/get") return prompts_get(params_object(params));
  throw RpcFailure{rpc::kMethodNotFound, "Method not found: " + method, nullptr};
}

nlohmann::json McpSession::initialize(const nlohmann::json& params) {
  const auto requested = params.value("protocolVersion", json());
  negotiated_version_ = options_.protocol_version;
  if (requested.is_string()) {
    for (std::string_view v : {std::string_view(options_.protocol_version), std::string_view("2025-03-26"),
                               std::string_view("2024-11-05")}) {
      if (requested.get<std::string>() == v) negotiated_version_ = std::string(v);
    }
  }
  log(LogLevel::kInfo, "initialized with protocol " + negotiated_version_);
  return {{"protocolVersion", negotiated_version_},
          {"capabilities",
           {{"tools", {{"listChanged", false}}},
            {"resources", {{"subscribe", false}, {"listChanged", false}}},
            {"prompts", {{"listChanged", false}}}}},
          {"serverInfo", {{"name", "polyforge"}, {"version", kServerVersion}}},
          {"instructions",
           options_.confirm
               ? "Side-effecting tools (generate_polymers, optimize_single_property, optimize_multi_property, "
                 "refine_structure) answer the first call with a confirmation token. Ask the user, then repeat "
                 "the call with arguments {\"confirm_token\": <token>} to run it."
               : "Confirmation is disabled; every tool runs immediately."}};
}

nlohmann::json McpSession::tools_list() const {
  json tools = json::array();
  for (const auto& t : tool_descriptors()) {
    json schema = t.input_schema;
    const bool gated = t.requires_confirmation && options_.confirm;
    if (gated) {
      schema["properties"]["confirm_token"] = {
          {"type", "string"}, {"description", "Token from a confirmation_required reply; runs the frozen call"}};
    }
    tools.push_back({{"name", t.name},
                     {"description", t.description},
                     {"inputSchema", std::move(schema)},
                     {"annotations", {{"readOnlyHint", !t.requires_confirmation}, {"requiresConfirmation", gated}}}});
  }
  return {{"tools", std::move(tools)}};
}

std::string McpSession::issue_token(const std::string& tool, const nlohmann::json& arguments) {
  ++token_counter_;
  const auto h = hash_combine(fnv1a64(tool + "\n" + to_wire(arguments)), token_counter_);
  std::string token = "confirm-" + std::to_string(token_counter_) + "-" + hex64(h);
  pending_[token] = PendingCall{tool, arguments};
  return token;
}

nlohmann::json McpSession::tools_call(const nlohmann::json& id, const nlohmann::json& params) {
  params_object(params);
  const auto name = string_param(params, "name");
  json arguments = params.value("arguments", json::object());
  if (!arguments.is_object()) throw RpcFailure{rpc::kInvalidParams, "params.arguments must be an object", nullptr};
  const auto* tool = find_tool(name);
  if (!tool) {
    throw RpcFailure{rpc::kInvalidParams, "Unknown tool: " + name, json{{"code", code_name(ErrorCode::kUnknownTool)}}};
  }

  json envelope{{"id", id}, {"tool", name}, {"arguments", arguments}};
  const auto finish = [&](json structured, bool is_error) {
    envelope["outcome"] = structured.value("status", std::string());
    if (is_error) envelope["error"] = structured["error"]["code"];
    history_.push_back(envelope);
    return tool_result(structured, is_error);
  };

  json effective = arguments;
  try {
    if (tool->requires_confirmation) {
      const auto tok = arguments.find("confirm_token");
      if (tok != arguments.end()) {
        if (!tok->is_string()) {
          throw SchemaViolation(std::vector<SchemaIssue>{{"/confirm_token", "expected string"}});
        }
        const auto token = tok->get<std::string>();
        effective.erase("confirm_token");
        if (options_.confirm) {
          const auto it = pending_.find(token);
          if (it == pending_.end()) {
            throw Error(ErrorCode::kStaleToken, "confirmation token '" + token + "' is unknown or already used");
          }
          PendingCall frozen = std::move(it->second);
          pending_.erase(it);
          if (frozen.tool != name) {
            throw Error(ErrorCode::kStaleToken, "confirmation token was issued for " + frozen.tool);
          }
          if (!effective.empty() && effective != frozen.arguments) {
            throw Error(ErrorCode::kStaleToken, "arguments differ from the call the token confirmed");
          }
          effective = std::move(frozen.arguments);
        }
      } else if (options_.confirm) {
        require_schema(tool->input_schema, effective);
        const auto token = issue_token(name, effective);
        log(LogLevel::kInfo, name + " awaiting confirmation");
        return finish({{"status", "confirmation_required"},
                       {"tool", name},
                       {"token", token},
                       {"arguments", effective},
                       {"message", "Run " + name + " with these arguments? Repeat the call with {\"confirm_token\": \"" +
                                       token + "\"} to proceed."}},
                      false);
      }
    }
    envelope["arguments"] = effective;
    json payload = toolbox_.call(name, effective);
    log(LogLevel::kInfo, name + " done");
    return finish({{"status", "ok"}, {"tool", name}, {"result", std::move(payload)}}, false);
  } catch (const Error& e) {
    log(LogLevel::kInfo, name + " failed: " + std::string(e.code_name()));
    return finish(error_payload(e), true);
  }
}

nlohmann::json McpSession::resources_list() const {
  json list = json::array();
  list.push_back({{"uri", kStatsUri},
                  {"name", "Database statistics"},
                  {"description", "Record counts, per-property summaries with units and the SA histogram"},
                  {"mimeType", "application/json"}});
  const std::size_t n = toolbox_.database().size();
  const std::size_t pages = (n + options_.page_size - 1) / options_.page_size;
  for (std::size_t p = 0; p < pages; ++p) {
    list.push_back({{"uri", std::string(kRecordsPrefix) + std::to_string(p)},
                    {"name", "Records page " + std::to_string(p)},
                    {"mimeType", "application/json"}});
  }
  list.push_back({{"uri", kHistoryUri}, {"name", "Session tool history"}, {"mimeType", "application/json"}});
  return {{"resources", std::move(list)}};
}

nlohmann::json McpSession::resource_templates_list() const {
  return {{"resourceTemplates",
           json::array({{{"uriTemplate", std::string(kRecordsPrefix) + "{page}"},
                         {"name", "Database records page"},
                         {"description", "Records in canonical order, " + std::to_string(options_.page_size) + " per page"},
                         {"mimeType", "application/json"}}})}};
}

nlohmann::json McpSession::resources_read(const nlohmann::json& params) const {
  const auto uri = string_param(params, "uri");
  json body;
  if (uri == kStatsUri) {
    body = database_stats_json(toolbox_.database());
  } else if (uri == kHistoryUri) {
    body = history_;
  } else if (uri.rfind(kRecordsPrefix, 0) == 0) {
    const std::string_view digits = std::string_view(uri).substr(kRecordsPrefix.size());
    std::size_t page = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), page);
    const std::size_t n = toolbox_.database().size();
    if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty() || page * options_.page_size >= n) {
      throw RpcFailure{rpc::kResourceNotFound, "Resource not found", json{{"uri", uri}}};
    }
    json records = json::array();
    for (const auto& r : toolbox_.database().page(page * options_.page_size, options_.page_size)) {
      records.push_back(to_json(r));
    }
    body = {{"page", page},
            {"page_size", options_.page_size},
            {"total", n},
            {"records", std::move(records)}};
  } else {
    throw RpcFailure{rpc::kResourceNotFound, "Resource not found", json{{"uri", uri}}};
  }
  return {{"contents", json::array({{{"uri", uri}, {"mimeType", "application/json"}, {"text", to_wire(body)}}})}};
}

nlohmann::json McpSession::prompts_list() const {
  json list = json::array();
  for (const auto& p : prompt_specs()) {
    json args = json::array();
    for (const auto& [name, desc] : p.arguments) args.push_back({{"name", name}, {"description", desc}, {"required", true}});
    list.push_back({{"name", p.name}, {"description", p.description}, {"arguments", std::move(args)}});
  }
  return {{"prompts", std::move(list)}};
}

nlohmann::json McpSession::prompts_get(const nlohmann::json& params) const {
  const auto name = string_param(params, "name");
  const json args = params.value("arguments", json::object());
  if (!args.is_object()) throw RpcFailure{rpc::kInvalidParams, "params.arguments must be an object", nullptr};
  for (const auto& p : prompt_specs()) {
    if (p.name != name) continue;
    json missing = json::array();
    for (const auto& [arg, desc] : p.arguments) {
      if (!args.contains(arg)) missing.push_back(arg);
    }
    if (!missing.empty()) throw RpcFailure{rpc::kInvalidParams, "Missing prompt arguments", json{{"missing", missing}}};
    return {{"description", p.description},
            {"messages", json::array({{{"role", "user"}, {"content", {{"type", "text"}, {"text", fill(p.text, args)}}}}})}};
  }
  throw RpcFailure{rpc::kInvalidParams, "Unknown prompt: " + name, nullptr};
}

}  // namespace polyforge

#include "polyforge/json_schema.hpp"

#include <cmath>

namespace polyforge {
namespace {

using nlohmann::json;

bool has_type(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "number") return v.is_number();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    return v.is_number_float() && std::isfinite(v.get<double>()) && std::floor(v.get<double>()) == v.get<double>();
  }
  return false;
}

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

std::string number_text(const json& v) { return v.dump(); }

void check(const json& schema, const json& v, const std::string& path, std::vector<SchemaIssue>& out) {
  if (!schema.is_object()) return;
  if (auto t = schema.find("type"); t != schema.end()) {
    bool ok = false;
    std::string names;
    if (t->is_string()) {
      ok = has_type(v, t->get<std::string>());
      names = t->get<std::string>();
    } else if (t->is_array()) {
      for (const auto& x : *t) {
        ok = ok || has_type(v, x.get<std::string>());
        names += (names.empty() ? "" : " or ") + x.get<std::string>();
      }
    }
    if (!ok) {
      out.push_back({path, "expected " + names});
      return;
    }
  }
  if (auto e = schema.find("enum"); e != schema.end()) {
    bool found = false;
    for (const auto& x : *e) found = found || x == v;
    if (!found) out.push_back({path, "must be one of " + e->dump()});
  }
  if (auto c = schema.find("const"); c != schema.end() && *c != v) out.push_back({path, "must equal " + c->dump()});

  if (v.is_number()) {
    const double x = v.get<double>();
    if (auto m = schema.find("minimum"); m != schema.end() && x < m->get<double>()) {
      out.push_back({path, "must be >= " + number_text(*m)});
    }
    if (auto m = schema.find("maximum"); m != schema.end() && x > m->get<double>()) {
      out.push_back({path, "must be <= " + number_text(*m)});
    }
    if (auto m = schema.find("exclusiveMinimum"); m != schema.end() && x <= m->get<double>()) {
      out.push_back({path, "must be > " + number_text(*m)});
    }
    if (auto m = schema.find("exclusiveMaximum"); m != schema.end() && x >= m->get<double>()) {
      out.push_back({path, "must be < " + number_text(*m)});
    }
  }
  if (v.is_string()) {
    if (auto m = schema.find("minLength"); m != schema.end() && v.get_ref<const std::string&>().size() < m->get<std::size_t>()) {
      out.push_back({path, "must have at least " + number_text(*m) + " characters"});
    }
  }
  if (v.is_array()) {
    if (auto m = schema.find("minItems"); m != schema.end() && v.size() < m->get<std::size_t>()) {
      out.push_back({path, "must have at least " + number_text(*m) + " items"});
    }
    if (auto m = schema.find("maxItems"); m != schema.end() && v.size() > m->get<std::size_t>()) {
      out.push_back({path, "must have at most " + number_text(*m) + " items"});
    }
    if (auto items = schema.find("items"); items != schema.end()) {
      for (std::size_t i = 0; i < v.size(); ++i) check(*items, v[i], path + "/" + std::to_string(i), out);
    }
  }
  if (v.is_object()) {
    if (auto req = schema.find("required"); req != schema.end()) {
      for (const auto& key : *req) {
        if (!v.contains(key.get<std::string>())) {
          out.push_back({path + "/" + escape_token(key.get<std::string>()), "is required"});
        }
      }
    }
    const auto props = schema.find("properties");
    const auto extra = schema.find("additionalProperties");
    for (const auto& [key, child] : v.items()) {
      const std::string child_path = path + "/" + escape_token(key);
      if (props != schema.end() && props->contains(key)) {
        check((*props)[key], child, child_path, out);
      } else if (extra != schema.end() && extra->is_boolean() && !extra->get<bool>()) {
        out.push_back({child_path, "is not an allowed field"});
      }
    }
  }
}

std::string describe(const std::vector<SchemaIssue>& issues) {
  std::string msg = "arguments do not match the schema:";
  for (const auto& i : issues) msg += " " + (i.path.empty() ? std::string("/") : i.path) + " " + i.message + ";";
  msg.pop_back();
  return msg;
}

}  // namespace

std::vector<SchemaIssue> check_schema(const nlohmann::json& schema, const nlohmann::json& value) {
  std::vector<SchemaIssue> out;
  check(schema, value, "", out);
  return out;
}

SchemaViolation::SchemaViolation(std::vector<SchemaIssue> issues)
    : Error(ErrorCode::kSchemaViolation, describe(issues)), issues_(std::move(issues)) {}

void require_schema(const nlohmann::json& schema, const nlohmann::json& value) {
  auto issues = check_schema(schema, value);
  if (!issues.empty()) throw SchemaViolation(std::move(issues));
}

}  // namespace polyforge

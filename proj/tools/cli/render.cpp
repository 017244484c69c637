#include "render.hpp"

#include <cstdio>
#include <sstream>
#include <vector>

#include "polyforge/property_model.hpp"

namespace polyforge::cli {
namespace {

using nlohmann::json;

constexpr const char* kRecordKeys[] = {"candidates", "ranked", "records"};

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
    return buf;
  }
  if (v.is_array()) {
    std::string out;
    for (const auto& x : v) out += (out.empty() ? "" : ";") + scalar_text(x);
    return out;
  }
  return v.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

const json* record_list(const json& payload) {
  for (const char* key : kRecordKeys) {
    if (payload.contains(key) && payload[key].is_array()) return &payload[key];
  }
  return nullptr;
}

void flatten(const json& v, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (v.is_object()) {
    for (const auto& [k, child] : v.items()) flatten(child, prefix.empty() ? k : prefix + "." + k, out);
  } else if (v.is_array() && !v.empty() && (v.front().is_object() || v.front().is_array())) {
    for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], prefix + "." + std::to_string(i), out);
  } else {
    out.emplace_back(prefix, scalar_text(v));
  }
}

std::vector<std::string> record_properties(const json& records) {
  std::vector<std::string> ids;
  for (const auto& id : target_property_ids()) {
    for (const auto& r : records) {
      if (r.contains("properties") && r["properties"].contains(id)) {
        ids.push_back(id);
        break;
      }
    }
  }
  return ids;
}

double property_value(const json& props, const std::string& id) {
  const auto& v = props[id];
  return v.is_object() ? v["value"].get<double>() : v.get<double>();
}

// Database rows carry `source`; generated records carry a provenance chain.
std::string record_source(const json& r) {
  if (r.contains("source")) return scalar_text(r["source"]);
  std::string out;
  for (const auto& step : r.value("provenance", json::array())) {
    out += (out.empty() ? "" : ">") + step.value("template", step.value("action", std::string()));
  }
  return out;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string render_json(const nlohmann::json& payload) {
  return payload.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

std::string render_csv(const nlohmann::json& payload) {
  std::ostringstream out;
  if (const auto* records = record_list(payload)) {
    const auto ids = record_properties(*records);
    out << "rank,cru";
    for (const auto& id : ids) out << "," << id;
    out << ",sa,sc,objective,out_of_range,source\n";
    int rank = 0;
    for (const auto& r : *records) {
      out << ++rank << "," << csv_cell(r.value("cru", std::string()));
      for (const auto& id : ids) {
        out << ",";
        if (r["properties"].contains(id)) out << scalar_text(json(property_value(r["properties"], id)));
      }
      out << "," << scalar_text(r.value("sa", json())) << "," << scalar_text(r.value("sc", json())) << ","
          << scalar_text(r.value("objective", json())) << "," << csv_cell(scalar_text(r.value("out_of_range", json())))
          << "," << csv_cell(record_source(r));
      out << "\n";
    }
    return out.str();
  }
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(payload, "", rows);
  out << "field,value\n";
  for (const auto& [k, v] : rows) out << csv_cell(k) << "," << csv_cell(v) << "\n";
  return out.str();
}

std::string render_table(const nlohmann::json& payload) {
  std::ostringstream out;
  for (const auto& [k, v] : payload.items()) {
    if (v.is_object() || (v.is_array() && !v.empty() && v.front().is_object())) continue;
    out << pad(k, 22) << scalar_text(v) << "\n";
  }
  const bool stats = payload.contains("properties") && payload["properties"].is_object() &&
                     !payload["properties"].empty() && payload["properties"].begin()->contains("count");
  if (stats) {
    out << "\n" << pad("property", 10) << pad("count", 8) << pad("min", 12) << pad("mean", 12) << pad("max", 12)
        << "unit\n";
    for (const auto& [id, block] : payload["properties"].items()) {
      out << pad(id, 10) << pad(scalar_text(block["count"]), 8) << pad(scalar_text(block["min"]), 12)
          << pad(scalar_text(block["mean"]), 12) << pad(scalar_text(block["max"]), 12)
          << block.value("units", std::string()) << "\n";
    }
  } else if (payload.contains("properties") && payload["properties"].is_object()) {
    out << "\n" << pad("property", 38) << pad("value", 12) << pad("unit", 16) << "flag\n";
    auto row = [&](const std::string& id, const json& block) {
      out << pad(block.value("name", id) + " (" + id + ")", 38) << pad(scalar_text(block["value"]), 12)
          << pad(block.value("units", std::string()), 16) << (block.value("out_of_range", false) ? "OUT OF RANGE" : "");
      if (block.contains("display")) {
        out << (block.value("out_of_range", false) ? "  " : "") << "= " << scalar_text(block["display"]["value"]) << " "
            << block["display"].value("units", std::string());
      }
      out << "\n";
    };
    for (const auto& [id, block] : payload["properties"].items()) row(id, block);
    if (payload.contains("logP")) row("logP", payload["logP"]);
  }
  if (const auto* records = record_list(payload)) {
    const auto ids = record_properties(*records);
    out << "\n" << pad("#", 4) << pad("cru", 48);
    for (const auto& id : ids) out << pad(id, 10);
    out << pad("SA", 8) << pad("SC", 8) << "objective\n";
    int rank = 0;
    for (const auto& r : *records) {
      out << pad(std::to_string(++rank), 4) << pad(r.value("cru", std::string()), 48);
      for (const auto& id : ids) {
        out << pad(r["properties"].contains(id) ? scalar_text(json(property_value(r["properties"], id))) : "", 10);
      }
      out << pad(scalar_text(r.value("sa", json())), 8) << pad(scalar_text(r.value("sc", json())), 8)
          << scalar_text(r.value("objective", json())) << "\n";
    }
  }
  for (const auto& [k, v] : payload.items()) {
    if (k == "properties" || k == "logP" || !v.is_object()) continue;
    if (k == "error") {
      out << "\nerror " << v.value("code", std::string()) << ": " << v.value("message", std::string()) << "\n";
      continue;
    }
    out << pad(k, 22) << v.dump(-1, ' ', false, json::error_handler_t::replace) << "\n";
  }
  return out.str();
}

}  // namespace polyforge::cli

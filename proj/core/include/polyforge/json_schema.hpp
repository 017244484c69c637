#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyforge/error.hpp"

namespace polyforge {

struct SchemaIssue {
  std::string path;  // JSON pointer to the offending value ("" for the root)
  std::string message;
};

/// Checks `value` against the JSON Schema subset used by the tool
/// descriptors: type, enum, const, required, properties,
/// additionalProperties (boolean), items, minItems, maxItems, minLength,
/// minimum, maximum, exclusiveMinimum, exclusiveMaximum. Unknown keywords
/// are ignored.
std::vector<SchemaIssue> check_schema(const nlohmann::json& schema, const nlohmann::json& value);

/// Error(kSchemaViolation) that lists every offending field.
class SchemaViolation : public Error {
 public:
  explicit SchemaViolation(std::vector<SchemaIssue> issues);
  const std::vector<SchemaIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<SchemaIssue> issues_;
};

/// Throws SchemaViolation when `check_schema` reports anything.
void require_schema(const nlohmann::json& schema, const nlohmann::json& value);

}  // namespace polyforge

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyforge/toolbox.hpp"

namespace polyforge {

inline constexpr std::string_view kDefaultProtocolVersion = "2025-03-26";

/// JSON-RPC error codes used on the wire.
namespace rpc {
inline constexpr int kParseError = -32700;
inline constexpr int kInvalidRequest = -32600;
inline constexpr int kMethodNotFound = -32601;
inline constexpr int kInvalidParams = -32602;
inline constexpr int kInternalError = -32603;
inline constexpr int kResourceNotFound = -32002;
}  // namespace rpc

struct McpOptions {
  std::string protocol_version{kDefaultProtocolVersion};
  bool confirm = true;  // two-phase confirmation for side-effecting tools
  std::size_t page_size = 50;
};

enum class LogLevel { kDebug, kInfo, kWarn, kError };

/// One server session: dispatches JSON-RPC messages in arrival order and
/// owns the pending confirmation tokens and the call history.
class McpSession {
 public:
  using Logger = std::function<void(LogLevel, const std::string&)>;

  explicit McpSession(const Toolbox& toolbox, McpOptions options = {});

  /// Handles one newline-delimited message. Returns the serialized
  /// response (no trailing newline), or nothing for notifications.
  std::optional<std::string> handle_line(std::string_view line);

  /// Handles a parsed message (object or batch array).
  std::optional<nlohmann::json> handle(const nlohmann::json& message);

  /// Append-only log of tool envelopes: id, tool, arguments, outcome.
  const std::vector<nlohmann::json>& history() const { return history_; }
  std::size_t pending_confirmations() const { return pending_.size(); }

  void set_logger(Logger logger) { logger_ = std::move(logger); }

 private:
  struct PendingCall {
    std::string tool;
    nlohmann::json arguments;
  };

  std::optional<nlohmann::json> handle_one(const nlohmann::json& message);
  nlohmann::json dispatch(const std::string& method, const nlohmann::json& params);
  nlohmann::json initialize(const nlohmann::json& params);
  nlohmann::json tools_list() const;
  nlohmann::json tools_call(const nlohmann::json& id, const nlohmann::json& params);
  nlohmann::json resources_list() const;
  nlohmann::json resource_templates_list() const;
  nlohmann::json resources_read(const nlohmann::json& params) const;
  nlohmann::json prompts_list() const;
  nlohmann::json prompts_get(const nlohmann::json& params) const;
  std::string issue_token(const std::string& tool, const nlohmann::json& arguments);
  void log(LogLevel level, const std::string& msg) const;

  const Toolbox& toolbox_;
  McpOptions options_;
  std::string negotiated_version_;
  std::map<std::string, PendingCall> pending_;
  std::uint64_t token_counter_ = 0;
  std::vector<nlohmann::json> history_;
  Logger logger_;
};

/// Compact single-line serialization; invalid UTF-8 is replaced rather
/// than thrown on.
std::string to_wire(const nlohmann::json& message);

}  // namespace polyforge

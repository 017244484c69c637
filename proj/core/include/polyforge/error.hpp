#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polyforge {

/// Stable machine-readable diagnostic codes. The string form (see
/// `code_name`) is part of the wire format of the CLI and the tool server.
enum class ErrorCode {
  kEmptyInput,
  kUnclosedRing,
  kUnbalancedParenthesis,
  kUnknownSymbol,
  kValenceViolation,
  kDanglingBond,
  kInvalidAromatic,
  kSelfBond,
  kDuplicateBond,
  kStarDegree,
  kInvalidGraph,
  kIncompatibleFingerprints,
  kInvalidArgument,
  kEmptyCorpus,
  kInsufficientData,
  kMissingLabel,
  kUnknownProperty,
  kGroupNotFound,
  kRewriteProducedInvalidGraph,
  kNoApplicablePairs,
  kMissingProperty,
  kNoFeasibleCandidate,
  kInvalidEdit,
  kSchemaMismatch,
  kAllRowsInvalid,
  kEmptyDatabase,
  kDegenerateData,
  kInvalidRange,
  kIoError,
  kUnknownTool,
  kSchemaViolation,
  kStaleToken,
};

std::string_view code_name(ErrorCode code);

/// Base exception for every domain failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const { return polyforge::code_name(code_); }

 private:
  ErrorCode code_;
};

/// Raised by the p-SMILES lexer and parser; carries the byte offset.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, const std::string& message, std::size_t position)
      : Error(code, message + " at offset " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace polyforge

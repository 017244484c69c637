#include "polyforge/error.hpp"

namespace polyforge {

std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyInput: return "E_EMPTY_INPUT";
    case ErrorCode::kUnclosedRing: return "E_UNCLOSED_RING";
    case ErrorCode::kUnbalancedParenthesis: return "E_UNBALANCED_PARENTHESIS";
    case ErrorCode::kUnknownSymbol: return "E_UNKNOWN_SYMBOL";
    case ErrorCode::kValenceViolation: return "E_VALENCE_VIOLATION";
    case ErrorCode::kDanglingBond: return "E_DANGLING_BOND";
    case ErrorCode::kInvalidAromatic: return "E_INVALID_AROMATIC";
    case ErrorCode::kSelfBond: return "E_SELF_BOND";
    case ErrorCode::kDuplicateBond: return "E_DUPLICATE_BOND";
    case ErrorCode::kStarDegree: return "E_STAR_DEGREE";
    case ErrorCode::kInvalidGraph: return "E_INVALID_GRAPH";
    case ErrorCode::kIncompatibleFingerprints: return "E_INCOMPATIBLE_FINGERPRINTS";
    case ErrorCode::kInvalidArgument: return "E_INVALID_ARGUMENT";
    case ErrorCode::kEmptyCorpus: return "E_EMPTY_CORPUS";
    case ErrorCode::kInsufficientData: return "E_INSUFFICIENT_DATA";
    case ErrorCode::kMissingLabel: return "E_MISSING_LABEL";
    case ErrorCode::kUnknownProperty: return "E_UNKNOWN_PROPERTY";
    case ErrorCode::kGroupNotFound: return "E_GROUP_NOT_FOUND";
    case ErrorCode::kRewriteProducedInvalidGraph: return "E_REWRITE_INVALID";
    case ErrorCode::kNoApplicablePairs: return "E_NO_APPLICABLE_PAIRS";
    case ErrorCode::kMissingProperty: return "E_MISSING_PROPERTY";
    case ErrorCode::kNoFeasibleCandidate: return "E_NO_FEASIBLE_CANDIDATE";
    case ErrorCode::kInvalidEdit: return "E_INVALID_EDIT";
    case ErrorCode::kSchemaMismatch: return "E_SCHEMA_MISMATCH";
    case ErrorCode::kAllRowsInvalid: return "E_ALL_ROWS_INVALID";
    case ErrorCode::kEmptyDatabase: return "E_EMPTY_DATABASE";
    case ErrorCode::kDegenerateData: return "E_DEGENERATE_DATA";
    case ErrorCode::kInvalidRange: return "E_INVALID_RANGE";
    case ErrorCode::kIoError: return "E_IO";
    case ErrorCode::kUnknownTool: return "E_UNKNOWN_TOOL";
    case ErrorCode::kSchemaViolation: return "E_SCHEMA_VIOLATION";
    case ErrorCode::kStaleToken: return "E_STALE_TOKEN";
  }
  return "E_UNKNOWN";
}

}  // namespace polyforge

#include "cgfa/errors.hpp"

namespace cgfa {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorKind::InvalidSupport: return "InvalidSupport";
    case ErrorKind::DegenerateScatter: return "DegenerateScatter";
    case ErrorKind::SingularR: return "SingularR";
    case ErrorKind::InvalidRank: return "InvalidRank";
    case ErrorKind::EmptyComponent: return "EmptyComponent";
    case ErrorKind::InvalidNesting: return "InvalidNesting";
    case ErrorKind::AllCandidatesFailed: return "AllCandidatesFailed";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NonNumericColumn: return "NonNumericColumn";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::DimensionUnsupported: return "DimensionUnsupported";
    case ErrorKind::DatasetUnavailable: return "DatasetUnavailable";
  }
  return "Unknown";
}

}  // namespace cgfa

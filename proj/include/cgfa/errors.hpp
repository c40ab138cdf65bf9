#pragma once

#include <stdexcept>
#include <string>

namespace cgfa {

enum class ErrorKind {
  InvalidArgument,
  NotPositiveDefinite,
  NonFiniteObjective,
  InvalidSupport,
  DegenerateScatter,
  SingularR,
  InvalidRank,
  EmptyComponent,
  InvalidNesting,
  AllCandidatesFailed,
  ParseError,
  NonNumericColumn,
  SchemaMismatch,
  IoError,
  DimensionUnsupported,
  DatasetUnavailable,
};

const char* to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so the C API can map it
// onto a stable status code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace cgfa

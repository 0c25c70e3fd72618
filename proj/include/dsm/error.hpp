#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dsm {

enum class ErrorCode {
  kMalformedMarkup,
  kUnknownFeature,
  kInvalidCounts,
  kParseError,
  kTypeConflict,
  kDegenerateSplit,
  kShapeMismatch,
  kNonFiniteLoss,
  kUnknownNode,
  kInvalidArgument,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

// All library failures are reported through this type. `line()` is nonzero
// only for errors tied to a position in an input file.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, int line = 0);
  // Same code and line, message prefixed with `[stage] `.
  Error(const Error& inner, std::string_view stage);

  ErrorCode code() const { return code_; }
  int line() const { return line_; }

 private:
  ErrorCode code_;
  int line_;
};

}  // namespace dsm

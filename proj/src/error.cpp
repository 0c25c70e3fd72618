#include "dsm/error.hpp"

namespace dsm {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedMarkup: return "MalformedMarkup";
    case ErrorCode::kUnknownFeature: return "UnknownFeature";
    case ErrorCode::kInvalidCounts: return "InvalidCounts";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kTypeConflict: return "TypeConflict";
    case ErrorCode::kDegenerateSplit: return "DegenerateSplit";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kUnknownNode: return "UnknownNode";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

static std::string format_message(ErrorCode code, const std::string& message,
                                  int line) {
  std::string out(error_code_name(code));
  if (line > 0) out += " (line " + std::to_string(line) + ")";
  out += ": ";
  out += message;
  return out;
}

Error::Error(ErrorCode code, const std::string& message, int line)
    : std::runtime_error(format_message(code, message, line)),
      code_(code),
      line_(line) {}

Error::Error(const Error& inner, std::string_view stage)
    : std::runtime_error("[" + std::string(stage) + "] " + inner.what()),
      code_(inner.code()),
      line_(inner.line()) {}

}  // namespace dsm

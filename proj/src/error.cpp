#include <rtriage/error.hpp>

#include <fmt/format.h>

namespace rtriage {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::NotHfs: return "NotHfs";
  case ErrorCode::Truncated: return "Truncated";
  case ErrorCode::CorruptCatalog: return "CorruptCatalog";
  case ErrorCode::CorruptExtents: return "CorruptExtents";
  case ErrorCode::UnknownId: return "UnknownId";
  case ErrorCode::NotFound: return "NotFound";
  case ErrorCode::NotAFolder: return "NotAFolder";
  case ErrorCode::UnrecognizedSource: return "UnrecognizedSource";
  case ErrorCode::Gone: return "Gone";
  case ErrorCode::AlreadyExists: return "AlreadyExists";
  case ErrorCode::InvalidStore: return "InvalidStore";
  case ErrorCode::UnknownOs: return "UnknownOs";
  case ErrorCode::UnknownPackage: return "UnknownPackage";
  case ErrorCode::EmptyBaseline: return "EmptyBaseline";
  case ErrorCode::ParseError: return "ParseError";
  case ErrorCode::NoStores: return "NoStores";
  case ErrorCode::SpecTooLarge: return "SpecTooLarge";
  case ErrorCode::InvalidName: return "InvalidName";
  case ErrorCode::InvalidArgument: return "InvalidArgument";
  case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(fmt::format("{}: {}", to_string(code), message))
    , code_(code) {}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorCode::ParseError, fmt::format("line {}: {}", line, message))
    , line_(line) {}

void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

} // namespace rtriage

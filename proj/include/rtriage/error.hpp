#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rtriage {

enum class ErrorCode {
  // hfs_volume
  NotHfs,
  Truncated,
  CorruptCatalog,
  CorruptExtents,
  UnknownId,
  NotFound,
  NotAFolder,
  // vfs
  UnrecognizedSource,
  Gone,
  // hashdb
  AlreadyExists,
  InvalidStore,
  UnknownOs,
  UnknownPackage,
  EmptyBaseline,
  ParseError,
  // matcher
  NoStores,
  // fixtures
  SpecTooLarge,
  InvalidName,
  // shared
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by import_rds; line numbers are 1-based and count the header.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

} // namespace rtriage

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rtriage::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kStoreEnvVar = "RETRO_TRIAGE_STORE";

struct Environment {
  /// Default --db for analyze.
  std::optional<std::string> default_store;

  static Environment from_process();
};

/// `args` excludes the program name. Machine output goes to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Environment& env = Environment::from_process());

} // namespace rtriage::cli

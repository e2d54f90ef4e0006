#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wgflow::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand (simulate, sweep, probe, bounds, validate). Results go
/// to `out`, usage text and error messages to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace wgflow::cli

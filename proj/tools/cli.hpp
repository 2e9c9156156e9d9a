#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace probe::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kInvalid = 1;  // usage, parse and validation errors
inline constexpr int kIoFailure = 2;

// Runs one `probe` invocation. `args` excludes the program name. Data goes
// to `out` (or to files named by flags), diagnostics to `err`.
int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace probe::cli

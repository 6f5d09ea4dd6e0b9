#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ruin {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

std::string version_string();

/// Batch driver. `args` excludes the program name. CSV goes to `out` (or the
/// --out file), diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ruin

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ntl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point of the ntlbench tool. `args` excludes the program name.
/// Progress and diagnostics go to `err`; artifacts only under --out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ntl::cli

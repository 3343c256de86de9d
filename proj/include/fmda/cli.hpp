#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fmda::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;  // I/O and numeric failures
inline constexpr int kExitConfig = 2;   // bad flags, config files or usage

/// Runs one `fmda` invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace fmda::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tde::cli {

enum ExitCode : int {
    kSuccess = 0,
    kConfigError = 2,
    kRuntimeError = 3,
};

// Entry point shared by the `tde` binary and the tests. args[0] is the
// program name. Diagnostics go to `err` as a single line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace tde::cli

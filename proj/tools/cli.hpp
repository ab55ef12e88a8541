#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace reachplan::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 2,
    kSceneError = 3,
    kInfeasible = 4,
    kIoError = 5,
};

/// Runs one command line (without the program name). Errors are reported on
/// err as a single `error: code=... message="..."` line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace reachplan::cli

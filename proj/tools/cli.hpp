#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gpae::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kDataError = 2,
    kNumericFailure = 3,
};

// Runs one invocation; args excludes the program name. Reports go to out,
// diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gpae::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace comet::cli {

enum ExitCode : int { Ok = 0, Validation = 2, Numerical = 3, Io = 4 };

/// Runs one command line (program name excluded) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace comet::cli

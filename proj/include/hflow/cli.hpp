#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hflow::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kInputError = 2, kNumericalError = 3, kInternalError = 4 };

/// Runs one subcommand. args[0] is the program name. Diagnostics go to `err`,
/// short progress lines to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace hflow::cli

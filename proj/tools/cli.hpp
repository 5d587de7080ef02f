#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace pipeflow::cli {

enum ExitCode : int {
  kOk = 0,
  kInvalidData = 1,
  kInvalidConfig = 2,
};

/// Runs one invocation. `args` excludes the program name. Standard input is
/// read from `in` when a subcommand's input file is omitted or "-", output
/// goes to `out` unless --out names a file.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

} // namespace pipeflow::cli

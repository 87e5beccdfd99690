#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stereonormal::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,   // unknown subcommand / flags, missing required options
  kIo = 3,      // unreadable or unwritable files
  kConfig = 4,  // invalid parameters, rig or scene files
  kFormat = 5,  // malformed input file content
};

/// Runs one command line (argv[0] is the program name).
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stereonormal::cli

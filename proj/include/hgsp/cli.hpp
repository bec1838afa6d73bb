#pragma once

#include <iosfwd>

namespace hgsp::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfigError = 2,
  kIoError = 3,
  kExtractionFailure = 4,
  kSizeCapExceeded = 5,
};

/// Runs the `hgsp` command line (argv[0] is the program name).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hgsp::cli

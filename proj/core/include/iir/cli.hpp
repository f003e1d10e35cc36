#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace iir {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitRuntimeError = 1,
  kExitUsage = 2,
  kExitVerificationFailed = 3,
};

/// Entry point behind the iirctl binary. `args` excludes the program name.
/// Subcommands: fit, curve, rates, verify, bench, synth.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace iir

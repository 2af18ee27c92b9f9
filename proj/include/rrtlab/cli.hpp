#pragma once

// Command-line front end: plan, events, counterexample, bench.

#include <iosfwd>
#include <string>
#include <vector>

namespace rrtlab {

/// Exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitVerificationFailed = 1,
  kExitValidation = 2,
  kExitUsage = 64,
};

/// Runs the tool with `args` (excluding the program name). Results go to
/// `out` unless --out names a file; diagnostics go to `err`. `threads` > 0
/// overrides RRTLAB_THREADS.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err, int threads = 0);

/// CSV headers, pinned by tests.
extern const char* const kPlanCsvHeader;
extern const char* const kEventsCsvHeader;
extern const char* const kEventTrialsCsvHeader;
extern const char* const kBenchCsvHeader;

}  // namespace rrtlab

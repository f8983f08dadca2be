#pragma once

#include <iosfwd>

namespace eprld::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kIoError = 3 };

/// Entry point of the eprld tool; never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eprld::cli

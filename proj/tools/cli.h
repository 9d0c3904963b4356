#pragma once

#include <iosfwd>

namespace fincascade::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kConvergence = 2, kIo = 3 };

/// Entry point of the fincascade command line. Reports go to files under --out; progress and
/// structured errors go to `out` / `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fincascade::cli

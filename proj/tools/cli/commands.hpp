#pragma once

#include <ostream>

namespace ganinv::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kIo = 3,
  kNumerical = 4,
};

/// Entry point of the `ganinv` tool; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ganinv::cli

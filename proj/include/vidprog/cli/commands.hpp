#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "vidprog/core/error.hpp"

namespace vidprog::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitData = 3,
  kExitFit = 4,
  kExitThreshold = 5,
};

int exit_code_for(ErrorCode code) noexcept;

// Entry point shared by the binary and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vidprog::cli

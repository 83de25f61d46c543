#pragma once

#include <string>
#include <vector>

namespace usar::cli {

// Entry point for the usar tool. Returns the process exit code:
//   0 success, 1 usage/config error, 2 numerical failure.
int run(const std::vector<std::string>& args);

}  // namespace usar::cli

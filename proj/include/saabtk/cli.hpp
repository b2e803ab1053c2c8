#pragma once

#include <string>
#include <vector>

namespace saabtk {

// Runs one toolkit subcommand. args excludes the program name.
// Exit status: 0 success, 1 runtime error, 2 usage error.
int run_cli(const std::vector<std::string>& args);

}  // namespace saabtk

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spiked::cli {

// Runs the command line (without the program name). Returns the exit code:
// 0 success, 2 configuration error, 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spiked::cli

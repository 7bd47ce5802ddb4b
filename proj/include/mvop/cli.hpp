#pragma once
#include <ostream>
#include <string>
#include <vector>

namespace mvop::cli {

// Batch driver: parses argv-style arguments, runs the requested workflow,
// writes report files under --out, prints a summary table to `out`.
// Exit codes: 0 all checks pass, 1 some check failed, 2 configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mvop::cli

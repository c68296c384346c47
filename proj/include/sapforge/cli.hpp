#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sapforge {

/// Runs the command line `args` (without the program name). Exit codes:
/// 0 success, 1 verification failures present, 2 usage or input error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace sapforge

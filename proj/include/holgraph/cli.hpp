#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace holgraph {

/// Runs the command line `args` (without the program name). Returns 0 on
/// success, 1 on a runtime failure and 2 on a usage error. Files written by a
/// failing command are removed.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace holgraph

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace limecli {

/// Entry point of the limesim command line. args excludes the program name.
/// Returns the process exit code: 0 ok, 1 usage, 2 config, 3 solver, 4 invariant.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace limecli

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sgn::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2 };

// args excludes the program name. Nothing is written under --out unless the
// run gets past argument and config validation.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sgn::cli

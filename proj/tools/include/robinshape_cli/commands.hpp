#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace robinshape::cli {

enum ExitCode : int { Ok = 0, Usage = 1, Numerical = 2, PropertyFailure = 3 };

/// Full CLI entry point. args excludes the program name. CSV goes to `out`
/// unless --out names a directory; messages go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace robinshape::cli

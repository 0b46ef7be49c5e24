// Command-line front end. Exit codes: 0 proof / success, 1 Fail / none /
// failed experiment, 2 usage or input error.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qdl {

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qdl

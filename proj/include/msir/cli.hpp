#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace msir::cli {

// Exit codes: 0 success, 1 usage error, 2 data or validation error.
enum ExitCode : int { ok = 0, usage = 1, data = 2 };

// args excludes the program name. Diagnostics and the resolved configuration
// go to err; `out` receives the usage synopsis.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace msir::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace floq {

// Exit codes of the command-line front end.
enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_numerical = 3 };

// args excludes the program name. CSV/JSON goes to --out or to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace floq

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace oceannet::cli {

/// Exit codes of the command-line tool.
enum Exit : int { kOk = 0, kRuntime = 1, kConfig = 2 };

/// Runs `oceannet <subcommand> ...` with args excluding the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace oceannet::cli

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace greendc {

/// Entry point of the `greendc` command. Returns the process exit code;
/// 0 iff every requested output was written.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace greendc

#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace trieguide {

/// Runs one pipeline command. `args` excludes the program name. Returns the process exit code.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace trieguide

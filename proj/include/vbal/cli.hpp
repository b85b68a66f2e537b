#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vbal {

/// Runs one subcommand (gen, color, verify, bruteforce, measure, bench).
/// `args` excludes the program name. Returns 0 on success, 1 on a domain
/// error and 2 on a usage error; errors print one line to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_command(int argc, char** argv);

}  // namespace vbal

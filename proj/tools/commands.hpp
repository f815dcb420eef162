// The `epl` command-line front end. Every subcommand accepts --config plus
// flag overrides (flags win), writes a config echo (`config.json`, or
// `<out>.json` for single-file outputs) and returns a nonzero status on any
// validation or numerical failure.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace epl::cli {

/// Runs one command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace epl::cli

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace repositioner::cli {

enum ExitCode : int { kOk = 0, kValidationError = 1, kRuntimeError = 2 };

// Subcommands: ingest, train, predict, eval, serve. Results go to `out`,
// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace repositioner::cli

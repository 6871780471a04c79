#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace decline::cli {

/// Entry point for the `decline` tool. Returns 0 on success, 1 on data
/// errors and 2 on usage errors. Subcommands: ingest, build, detect,
/// evaluate, serve, export, import.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace decline::cli

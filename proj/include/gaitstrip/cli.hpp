#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gaitstrip {

// Subcommands: init, fuse, infer, eval, bench, selftest.
// Returns 0 on success, 1 on runtime failure, 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace gaitstrip

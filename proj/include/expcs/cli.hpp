#pragma once

#include <iosfwd>

namespace expcs {

/// Entry point of the `expcs` tool. Returns 0 on success, 1 on usage or input
/// errors and 2 when a verification or suite check fails.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace expcs

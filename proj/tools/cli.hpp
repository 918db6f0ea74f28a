#pragma once

#include <iosfwd>

namespace lincore::cli {

/// Entry point of the `lincore` tool. Exit codes: 0 success, 1 experiment
/// or selftest failure, 2 usage error (bad flags, bad config).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lincore::cli

#pragma once

#include <iosfwd>

namespace mimpact::cli {

/// Runs one subcommand. Returns 0 on success, 1 on a fatal input or config
/// error, 2 on an internal invariant failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mimpact::cli

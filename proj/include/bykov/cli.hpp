#pragma once

#include <iosfwd>

namespace bykov::cli {

/// Parses argv and runs one subcommand. Returns 0 on success, 1 on a
/// validation or computation failure, 2 on a usage error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bykov::cli

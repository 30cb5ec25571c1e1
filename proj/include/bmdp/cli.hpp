#pragma once

#include <iosfwd>

namespace bmdp {

/// Entry point of the bmdp command line tool. Exit status: 0 on success, 1
/// on usage or configuration errors (including invalid model files), 2 on
/// runtime failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bmdp

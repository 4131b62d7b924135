#pragma once

#include <iosfwd>

namespace wloo::cli {

// Returns the number of failed checks.
int run_selftest(std::ostream& out);

}  // namespace wloo::cli

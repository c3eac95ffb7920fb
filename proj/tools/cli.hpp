#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nrmi::cli {

/// Runs one nrmi-lab invocation. `args[0]` is the program name.
/// Returns 0 on success, 1 on usage errors, 2 on numerical failures.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nrmi::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hdrkit {

/// Runs one hdrkit command. `args` excludes the program name.
/// Returns 0 on success, 1 on a usage error and 2 on a data error; errors
/// are reported as a single line on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hdrkit

#pragma once

#include <string>
#include <vector>

namespace sensaudit::cli {

// Entry point shared by the binary and the tests. `args` excludes the
// program name. Returns the process exit status: 0 on success, 1 on
// runtime errors, 2 on usage errors.
int run(const std::vector<std::string>& args);

}  // namespace sensaudit::cli

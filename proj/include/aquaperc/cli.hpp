#pragma once

#include <string>
#include <vector>

namespace aquaperc::cli {

// Runs one aquaperc invocation. Returns 0 on success, 1 on usage errors,
// 2 on runtime failures.
int dispatch(const std::vector<std::string>& args);

}  // namespace aquaperc::cli

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mso {

// Runs one CLI invocation; returns the process exit code (0 success,
// 1 domain or usage error, 2 budget exhaustion).
int cli_run(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace mso

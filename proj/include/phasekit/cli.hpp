#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace phasekit {

/// Entry point of the `phasekit` tool. args excludes the program name.
/// Returns 0 on success, 2 for configuration or usage errors, 3 for
/// numerical failures; failures print one diagnostic line to err.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_command(int argc, const char* const* argv);

}  // namespace phasekit

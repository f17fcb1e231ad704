#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nsg {

// Command-line surface.  Exit codes: 0 success, 1 failed check (or failed
// suite criteria), 2 usage or parse errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nsg

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace courtgrid_cli {

/// Runs one command line. Returns 0 on success, 1 on usage errors and 2 on
/// data or validation errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace courtgrid_cli

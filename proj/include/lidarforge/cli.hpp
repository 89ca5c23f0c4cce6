#pragma once

#include <iostream>
#include <ostream>

namespace lidarforge {

/// Command-line entry point. Returns 0 on success, 1 on invalid input or
/// configuration, 2 on runtime failure.
int run_cli(int argc, char **argv, std::ostream &out = std::cout, std::ostream &err = std::cerr);

}  // namespace lidarforge

#pragma once

#include <string>
#include <vector>

namespace ddlab::cli {

/// Parses argv and runs the requested subcommand.
/// Exit codes: 0 success, 2 configuration error (message names the offending
/// key), 1 runtime failure.
int parse_and_dispatch(const std::vector<std::string>& args);

} // namespace ddlab::cli

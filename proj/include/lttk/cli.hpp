#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lttk::cli {

inline constexpr const char* kVersion = "0.1.0";

// Runs one toolkit command. `args` is the command line without the
// program name. Reports go to `out`, diagnostics to `err`.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error,
// 3 verification failure.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace lttk::cli

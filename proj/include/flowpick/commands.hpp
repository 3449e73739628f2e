#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "flowpick/error.hpp"

namespace flowpick {

enum ExitCode : int { kExitOk = 0, kExitData = 1, kExitConfig = 2, kExitService = 3 };

ExitCode exit_code_for(Errc code) noexcept;

/// Entry point behind the `flowpick` binary. `args` excludes the program
/// name. Commands: validate, augment, score, table, select, export-ft,
/// analyze.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flowpick

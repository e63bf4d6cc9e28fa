#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace semtm::cli {

enum ExitCode : int { Ok = 0, CheckFailed = 1, InputError = 2, DomainError = 3 };

/// Runs one subcommand. `args` excludes the program name. Results go to
/// `out`, diagnostics to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace semtm::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dualgeo::cli {

/// Exit statuses.
enum Status { kPass = 0, kClaimFailed = 1, kUsage = 2, kValidation = 3 };

/// Runs one command; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dualgeo::cli

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sociolex::cli {

/// Exit codes: 0 success, 1 data error, 2 usage error.
constexpr int kExitOk = 0;
constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace sociolex::cli

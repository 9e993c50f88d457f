#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace s2gen::cli {

enum ExitCode : int {
    kOk = 0,
    kValidation = 1,
    kIo = 2,
    kExhausted = 3,
};

/// Entry point shared by the executable and the tests. args[0] is the
/// program name. Every flag can also come from an S2_<FLAG> environment
/// variable; precedence is flags > environment > --config file > defaults.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace s2gen::cli

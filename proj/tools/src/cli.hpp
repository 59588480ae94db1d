#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lagcast::cli {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputEnv = "LAGCAST_OUTPUT_DIR";

/// Runs one `lagcast` invocation. Returns 0 on success, 1 on usage, input,
/// validation or configuration errors ("error: ..." on `err`), 2 on internal
/// invariant failures.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lagcast::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fvc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidInput = 1;
inline constexpr int kExitRuntimeFailure = 2;
inline constexpr unsigned long long kDefaultSeed = 42;

// Runs one invocation. args excludes the program name. Diagnostics go to err
// as a single line; progress summaries go to out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Applies FVC_THREADS (0 = serial) to the library thread limit. When unset,
// all hardware threads are allowed.
void configure_threads_from_env();

}  // namespace fvc::cli

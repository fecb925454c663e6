#ifndef PROMPTCD_CLI_H_
#define PROMPTCD_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace promptcd {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitBackend = 3;

// Entry point behind the `promptcd` binary. Subcommands: detect, synth,
// eval, baseline-rcva, derive. Diagnostics go to `err` as a single line.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace promptcd

#endif  // PROMPTCD_CLI_H_

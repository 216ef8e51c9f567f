#ifndef SEGWAVE_CLI_RUNNER_HPP
#define SEGWAVE_CLI_RUNNER_HPP

#include <string>
#include <vector>

namespace segwave {

/// Dispatches one CLI invocation (arguments without the program name).
/// Exit codes: 0 success, 2 hypothesis violation (speed ordering, sign
/// formula inapplicable, failed assumption checks), 1 numerical or usage
/// failure.
int run_cli(std::vector<std::string> args);

}  // namespace segwave

#endif

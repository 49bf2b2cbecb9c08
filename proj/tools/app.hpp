#pragma once

namespace nmixprev::cli {

// Full command-line entry point. Exit codes: 0 success, 2 usage,
// 3 data, 4 convergence, 5 degenerate model.
int run(int argc, char** argv);

}  // namespace nmixprev::cli

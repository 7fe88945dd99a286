#pragma once

#include <string>
#include <vector>

namespace fermicrit {

// One invariant check: passed iff measured <= bound (both always finite; a
// check that threw reports measured = bound + 1 and the message in context).
struct CheckReport {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double bound = 0.0;
    std::string context;
};

// Cross-module invariant suite. "fast" runs the grid / potential / state /
// energy property checks (< 1 minute); "full" adds the radial oracles, the
// a*_1 and dual Lieb-Thirring estimates with the duality check, solver and
// critical invariants, and a short 3-point continuation. Deterministic per
// seed. Failures are reports, never exceptions. n_override > 0 replaces
// every fixture's grid resolution (used to demonstrate undersized grids);
// 0 keeps the defaults. Throws ConfigError only for an unknown level or an
// invalid override.
std::vector<CheckReport> run_suite(const std::string& level,
                                   unsigned long long seed,
                                   int n_override = 0);

}  // namespace fermicrit

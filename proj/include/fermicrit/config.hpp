#pragma once

#include <array>
#include <string>
#include <vector>

#include "fermicrit/solver.hpp"

namespace fermicrit {

// One JSON document drives every subcommand. Quantities are dimensionless.
// coupling carries either a direct value {"a": ...} or a blow-up schedule
// {"schedule": [eps...], "relative": bool, "a_star": optional}; relative
// schedules are fractions of a_star (estimated at run time when a_star is
// absent or zero). threads is validated and reserved: every kernel in this
// build is single-threaded, so results are trivially independent of it.
struct RunConfig {
    int n_per_axis = 48;
    double box_length = 40.0;
    std::vector<std::array<double, 3>> centers{{0.0, 0.0, 0.0}};
    bool has_a = false;
    double a = 0.0;
    std::vector<double> schedule;
    bool schedule_relative = false;
    double a_star = 0.0;  // 0 = estimate when needed
    double particle_number = 1.0;
    SolverConfig solver;
    std::string output_dir = "out";
    unsigned long long seed = 1;
    int threads = 0;  // 0 = machine default
    std::string state_path;                         // optional stored state
    std::vector<double> t_sweep{1, 2, 4, 8, 16};    // nonexistence dilations
};

RunConfig default_config();

// Parse + validate. Unknown keys are rejected (typo safety); missing keys
// take the defaults above. Throws ConfigError with the offending key.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// Every module precondition that can be checked without building fields.
void validate_run_config(const RunConfig& cfg);

// The full document with defaults filled in (print-config output).
std::string config_to_json(const RunConfig& cfg);

// output_dir after the FERMICRIT_OUTPUT_DIR environment override.
std::string resolved_output_dir(const RunConfig& cfg);

}  // namespace fermicrit

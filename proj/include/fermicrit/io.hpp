#pragma once

#include <string>
#include <vector>

#include "fermicrit/blowup.hpp"
#include "fermicrit/critical.hpp"
#include "fermicrit/solver.hpp"
#include "fermicrit/verify.hpp"

namespace fermicrit {

// Shortest round-trip decimal for a double (snprintf %.17g).
std::string format_g17(double v);

// Plot-ready CSV emitters. All throw ConfigError when the file cannot be
// opened or written.
void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows);
void write_continuation_csv(const std::string& path,
                            const std::vector<BlowupRecord>& records);
void write_sweep_csv(const std::string& path,
                     const std::vector<NonexistPoint>& points);
void write_reports_csv(const std::string& path,
                       const std::vector<CheckReport>& reports);

// JUnit-style XML for CI consumption; one testcase per check.
void write_junit_xml(const std::string& path, const std::string& suite_name,
                     const std::vector<CheckReport>& reports);

// Result records as JSON documents.
void write_breakdown_json(const std::string& path, const GroundState& state,
                          double a, double lambda);
void write_critical_json(const std::string& path, const CriticalEstimate& a_est,
                         const LTEstimate& l_est, double duality_error);

}  // namespace fermicrit

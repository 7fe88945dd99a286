#include "fermicrit/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "fermicrit/errors.hpp"

namespace fermicrit {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot open for writing: " + path);
    }
    return out;
}

void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) {
        throw ConfigError("write failed: " + path);
    }
}

// Quote a CSV cell (commas, quotes, newlines).
std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += "\"\"";
        else q += c;
    }
    q += "\"";
    return q;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows) {
    std::ofstream out = open_out(path);
    out << "iteration,energy,grad_norm,step\n";
    for (const TraceRow& r : rows) {
        out << r.iteration << ',' << format_g17(r.energy) << ','
            << format_g17(r.grad_norm) << ',' << format_g17(r.step) << '\n';
    }
    finish(out, path);
}

void write_continuation_csv(const std::string& path,
                            const std::vector<BlowupRecord>& records) {
    std::ofstream out = open_out(path);
    std::size_t rates = records.empty() ? 0 : records.front().tail_rates.size();
    out << "a,eps,energy_total,scaled_energy,kinetic,external,nonlinear,"
           "center_x,center_y,center_z,nearest_center_index,virial_residual,"
           "energy_law_residual,rank_found";
    for (std::size_t i = 1; i <= rates; ++i) out << ",tail_rate_" << i;
    out << ",converged\n";
    for (const BlowupRecord& r : records) {
        out << format_g17(r.a) << ',' << format_g17(r.eps) << ','
            << format_g17(r.energy_total) << ',' << format_g17(r.scaled_energy)
            << ',' << format_g17(r.breakdown.kinetic) << ','
            << format_g17(r.breakdown.external) << ','
            << format_g17(r.breakdown.nonlinear) << ','
            << format_g17(r.concentration_center[0]) << ','
            << format_g17(r.concentration_center[1]) << ','
            << format_g17(r.concentration_center[2]) << ','
            << r.nearest_center_index << ','
            << format_g17(r.identity_residuals.count("virial")
                              ? r.identity_residuals.at("virial")
                              : std::nan(""))
            << ','
            << format_g17(r.identity_residuals.count("energy_law")
                              ? r.identity_residuals.at("energy_law")
                              : std::nan(""))
            << ',' << r.rank_found;
        for (std::size_t i = 0; i < rates; ++i) {
            out << ','
                << format_g17(i < r.tail_rates.size() ? r.tail_rates[i]
                                                      : std::nan(""));
        }
        out << ',' << (r.converged ? 1 : 0) << '\n';
    }
    finish(out, path);
}

void write_sweep_csv(const std::string& path,
                     const std::vector<NonexistPoint>& points) {
    std::ofstream out = open_out(path);
    out << "t,energy,truncated\n";
    for (const NonexistPoint& p : points) {
        out << format_g17(p.t) << ',' << format_g17(p.energy) << ','
            << (p.truncated ? 1 : 0) << '\n';
    }
    finish(out, path);
}

void write_reports_csv(const std::string& path,
                       const std::vector<CheckReport>& reports) {
    std::ofstream out = open_out(path);
    out << "name,passed,measured,bound,context\n";
    for (const CheckReport& r : reports) {
        out << csv_cell(r.name) << ',' << (r.passed ? 1 : 0) << ','
            << format_g17(r.measured) << ',' << format_g17(r.bound) << ','
            << csv_cell(r.context) << '\n';
    }
    finish(out, path);
}

void write_junit_xml(const std::string& path, const std::string& suite_name,
                     const std::vector<CheckReport>& reports) {
    std::ofstream out = open_out(path);
    std::size_t failures = 0;
    for (const CheckReport& r : reports) {
        if (!r.passed) ++failures;
    }
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<testsuite name=\"" << xml_escape(suite_name) << "\" tests=\""
        << reports.size() << "\" failures=\"" << failures << "\">\n";
    for (const CheckReport& r : reports) {
        out << "  <testcase classname=\"fermicrit.verify\" name=\""
            << xml_escape(r.name) << "\"";
        if (r.passed) {
            out << "/>\n";
        } else {
            out << ">\n    <failure message=\"measured=" << format_g17(r.measured)
                << " bound=" << format_g17(r.bound) << "\">"
                << xml_escape(r.context) << "</failure>\n  </testcase>\n";
        }
    }
    out << "</testsuite>\n";
    finish(out, path);
}

void write_breakdown_json(const std::string& path, const GroundState& state,
                          double a, double lambda) {
    nlohmann::json j;
    j["a"] = a;
    j["lambda"] = lambda;
    j["converged"] = state.converged;
    j["iterations"] = state.iterations;
    j["breakdown"] = {{"kinetic", state.breakdown.kinetic},
                      {"external", state.breakdown.external},
                      {"nonlinear", state.breakdown.nonlinear},
                      {"coupling", state.breakdown.coupling},
                      {"total", state.breakdown.total}};
    j["multipliers"] = state.multipliers;
    j["residuals"] = state.residuals;
    j["occupations"] = state.gamma.occupations;
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
    finish(out, path);
}

void write_critical_json(const std::string& path, const CriticalEstimate& a_est,
                         const LTEstimate& l_est, double duality_error) {
    nlohmann::json j;
    j["n"] = a_est.n;
    j["a_star"] = a_est.a_star;
    j["rank_found"] = a_est.rank_found;
    j["q_residual"] = a_est.residual;
    j["l_star"] = l_est.l_star;
    j["eigenvalues"] = l_est.eigenvalues;
    j["degenerate"] = l_est.degenerate;
    j["duality_error"] = duality_error;
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
    finish(out, path);
}

}  // namespace fermicrit

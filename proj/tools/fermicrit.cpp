#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "fermicrit/blowup.hpp"
#include "fermicrit/config.hpp"
#include "fermicrit/critical.hpp"
#include "fermicrit/errors.hpp"
#include "fermicrit/io.hpp"
#include "fermicrit/solver.hpp"
#include "fermicrit/state.hpp"
#include "fermicrit/verify.hpp"

namespace {

using namespace fermicrit;

std::string prepare_output_dir(const RunConfig& cfg) {
    std::string dir = resolved_output_dir(cfg);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory: " + dir + " (" +
                          ec.message() + ")");
    }
    return dir;
}

int cmd_minimize(const RunConfig& cfg) {
    if (!cfg.has_a) {
        throw ConfigError("minimize requires coupling.a");
    }
    GridPtr g = make_grid(cfg.n_per_axis, cfg.box_length);
    PotentialSpec pot = build_coulomb(g, cfg.centers);
    SolverConfig scfg = cfg.solver;
    scfg.trace = true;

    DensityMatrix warm;
    bool have_warm = false;
    if (!cfg.state_path.empty()) {
        warm = load_state(cfg.state_path);
        have_warm = true;
    }
    GroundState raw = minimize(pot, cfg.a, cfg.particle_number, scfg,
                               have_warm ? &warm : nullptr);
    GroundState gs = scf_refine(raw, pot, cfg.a, scfg);
    gs.trace = raw.trace;
    gs.iterations = raw.iterations;

    std::string dir = prepare_output_dir(cfg);
    save_state(dir + "/state.bin", gs.gamma);
    write_breakdown_json(dir + "/breakdown.json", gs, cfg.a,
                         cfg.particle_number);
    write_trace_csv(dir + "/trace.csv", gs.trace);

    std::cout << "minimize: a=" << format_g17(cfg.a)
              << " lambda=" << format_g17(cfg.particle_number)
              << " total=" << format_g17(gs.breakdown.total)
              << " iters=" << gs.iterations
              << (gs.converged ? " converged" : " NOT converged") << "\n";
    std::cout << "multipliers:";
    for (double m : gs.multipliers) std::cout << ' ' << format_g17(m);
    std::cout << "\noutputs: " << dir << "/{state.bin,breakdown.json,trace.csv}"
              << "\n";
    return gs.converged ? 0 : 2;
}

int cmd_critical(const std::vector<int>& ns, const RunConfig& cfg) {
    if (ns.empty()) {
        throw ConfigError("critical requires at least one --n value");
    }
    GridPtr g = make_grid(cfg.n_per_axis, cfg.box_length);
    SolverConfig scfg = cfg.solver;
    std::string dir = prepare_output_dir(cfg);

    struct Row {
        int n;
        double a_star, l_star, duality;
    };
    std::vector<Row> rows;
    bool any_failed = false;
    for (int n : ns) {
        try {
            CriticalEstimate est = estimate_a_star(n, g, scfg);
            LTEstimate lt = estimate_l_star(n, g, scfg);
            double d = duality_check(est, lt);
            write_critical_json(dir + "/critical_n" + std::to_string(n) +
                                    ".json",
                                est, lt, d);
            rows.push_back({n, est.a_star, lt.l_star, d});
        } catch (const NumericalError& e) {
            any_failed = true;
            std::cerr << "critical n=" << n << " failed: " << e.what() << "\n";
        }
    }

    std::printf("%4s %16s %16s %16s\n", "n", "a_star", "l_star",
                "duality_error");
    for (const Row& r : rows) {
        std::printf("%4d %16.9g %16.9g %16.9g\n", r.n, r.a_star, r.l_star,
                    r.duality);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t k = 0; k < rows.size(); ++k) {
            if (rows[k].n == 2 * rows[i].n) {
                std::printf("a*_%d - a*_%d = %.9g (strictly positive expected)\n",
                            rows[i].n, rows[k].n,
                            rows[i].a_star - rows[k].a_star);
            }
        }
    }
    return any_failed ? 2 : 0;
}

int cmd_blowup(const RunConfig& cfg) {
    if (cfg.schedule.empty()) {
        throw ConfigError("blowup requires coupling.schedule");
    }
    int n = static_cast<int>(std::lround(cfg.particle_number));
    if (std::abs(cfg.particle_number - n) > 1e-12 || (n != 2 && n != 3)) {
        throw ConfigError("blowup requires integer particle_number 2 or 3");
    }
    GridPtr g = make_grid(cfg.n_per_axis, cfg.box_length);
    PotentialSpec pot = build_coulomb(g, cfg.centers);
    SolverConfig scfg = cfg.solver;

    double a_star = cfg.a_star;
    if (!(a_star > 0.0)) {
        std::cout << "blowup: estimating a*_" << n << " first\n";
        a_star = estimate_a_star(n, g, scfg).a_star;
        std::cout << "blowup: a*_" << n << " = " << format_g17(a_star) << "\n";
    }
    std::vector<double> sched = cfg.schedule;
    if (cfg.schedule_relative) {
        for (double& e : sched) e *= a_star;
    }

    std::vector<BlowupRecord> records =
        run_continuation(n, pot, a_star, sched, scfg);

    std::string dir = prepare_output_dir(cfg);
    write_continuation_csv(dir + "/continuation.csv", records);
    int converged = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        save_state(dir + "/state_eps_" + std::to_string(i) + ".bin",
                   records[i].rescaled);
        if (records[i].converged) ++converged;
        std::cout << "eps=" << format_g17(records[i].eps)
                  << " scaled_energy=" << format_g17(records[i].scaled_energy)
                  << " center_index=" << records[i].nearest_center_index
                  << " rank=" << records[i].rank_found
                  << (records[i].converged ? "" : " (not converged)") << "\n";
    }
    std::cout << "outputs: " << dir << "/continuation.csv and per-eps states\n";
    return 2 * converged < static_cast<int>(records.size()) ? 2 : 0;
}

int cmd_nonexist(const RunConfig& cfg) {
    if (!cfg.has_a) {
        throw ConfigError("nonexist requires coupling.a (at or above a_star)");
    }
    if (cfg.t_sweep.size() < 2) {
        throw ConfigError("nonexist requires at least 2 sweep points "
                          "(trend undefined)");
    }
    GridPtr g = make_grid(cfg.n_per_axis, cfg.box_length);
    PotentialSpec pot = build_coulomb(g, cfg.centers);
    SolverConfig scfg = cfg.solver;

    DensityMatrix optimizer;
    double a_star = cfg.a_star;
    if (!cfg.state_path.empty()) {
        if (!(a_star > 0.0)) {
            throw ConfigError(
                "nonexist with state_path requires coupling.a_star");
        }
        optimizer = load_state(cfg.state_path);
    } else {
        int n = std::max(1, static_cast<int>(std::lround(cfg.particle_number)));
        std::cout << "nonexist: estimating a*_" << n << " and its optimizer\n";
        CriticalEstimate est = estimate_a_star(n, g, scfg);
        optimizer = est.optimizer;
        if (!(a_star > 0.0)) a_star = est.a_star;
        std::cout << "nonexist: a*_" << n << " = " << format_g17(a_star) << "\n";
    }

    std::vector<NonexistPoint> points =
        nonexistence_demo(pot, cfg.a, cfg.t_sweep, optimizer, a_star);
    std::string dir = prepare_output_dir(cfg);
    write_sweep_csv(dir + "/sweep.csv", points);

    bool decreasing = true;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (!(points[i].energy < points[i - 1].energy)) decreasing = false;
    }
    for (const NonexistPoint& p : points) {
        std::cout << "t=" << format_g17(p.t) << " energy=" << format_g17(p.energy)
                  << (p.truncated ? " (truncated tail quadrature)" : "") << "\n";
    }
    std::cout << (decreasing ? "strictly decreasing trend confirmed"
                             : "trend NOT strictly decreasing")
              << "; outputs: " << dir << "/sweep.csv\n";
    return decreasing ? 0 : 2;
}

int cmd_verify(const std::string& level, unsigned long long seed, int grid_n,
               const std::string& out) {
    std::vector<CheckReport> reports = run_suite(level, seed, grid_n);
    RunConfig tmp;
    tmp.output_dir = out;
    std::string dir = prepare_output_dir(tmp);
    write_reports_csv(dir + "/reports.csv", reports);
    write_junit_xml(dir + "/junit.xml", "fermicrit-" + level, reports);

    int failed = 0;
    for (const CheckReport& r : reports) {
        if (!r.passed) ++failed;
        std::printf("[%s] %-36s measured=%-13.6g bound=%-13.6g\n",
                    r.passed ? "PASS" : "FAIL", r.name.c_str(), r.measured,
                    r.bound);
        if (!r.passed) std::printf("       %s\n", r.context.c_str());
    }
    std::printf("%d/%zu checks passed; reports in %s\n",
                static_cast<int>(reports.size()) - failed, reports.size(),
                dir.c_str());
    return failed == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fermionic NLS ground states: minimization, critical "
                 "couplings, Lieb-Thirring duals, blow-up continuation"};
    app.require_subcommand(0, 1);

    std::string config_path;
    bool print_config = false;
    app.add_option("--config", config_path, "RunConfig JSON file");
    app.add_flag("--print-config", print_config,
                 "print the effective config (defaults merged) and exit");

    CLI::App* sub_min = app.add_subcommand("minimize", "ground-state search");
    CLI::App* sub_crit =
        app.add_subcommand("critical", "estimate a*_n and L*_n, print duality");
    std::vector<int> ns;
    sub_crit->add_option("--n", ns, "ranks to estimate (repeatable)");
    CLI::App* sub_blow =
        app.add_subcommand("blowup", "continuation a -> a* with rescaling");
    CLI::App* sub_non =
        app.add_subcommand("nonexist", "dilated-family energy sweep at a >= a*");
    CLI::App* sub_ver = app.add_subcommand("verify", "invariant suite");
    std::string level = "fast";
    unsigned long long vseed = 7;
    int grid_n = 0;
    std::string vout = "out";
    sub_ver->add_option("--level", level, "fast or full");
    sub_ver->add_option("--seed", vseed, "suite seed");
    sub_ver->add_option("--grid-n", grid_n,
                        "override every fixture grid resolution (0 = defaults)");
    sub_ver->add_option("--out", vout, "report directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        RunConfig cfg =
            config_path.empty() ? default_config() : load_config(config_path);
        if (print_config) {
            std::cout << config_to_json(cfg) << "\n";
            return 0;
        }
        if (sub_min->parsed()) return cmd_minimize(cfg);
        if (sub_crit->parsed()) return cmd_critical(ns, cfg);
        if (sub_blow->parsed()) return cmd_blowup(cfg);
        if (sub_non->parsed()) return cmd_nonexist(cfg);
        if (sub_ver->parsed()) return cmd_verify(level, vseed, grid_n, vout);
        std::cerr << app.help() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const ContractViolation& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    }
}

#include "fermicrit/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fermicrit/errors.hpp"

namespace fermicrit {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) {
            throw ConfigError("unknown config key: " + where + it.key());
        }
    }
}

double require_number(const json& j, const std::string& key) {
    if (!j.at(key).is_number()) {
        throw ConfigError("config key must be a number: " + key);
    }
    return j.at(key).get<double>();
}

}  // namespace

RunConfig default_config() { return RunConfig{}; }

RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("config root must be a JSON object");
    }
    reject_unknown(j, {"grid", "centers", "coupling", "particle_number",
                       "solver", "output_dir", "seed", "threads", "state_path",
                       "t_sweep"},
                   "");

    RunConfig cfg;
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        reject_unknown(g, {"n_per_axis", "box_length"}, "grid.");
        if (g.contains("n_per_axis")) {
            cfg.n_per_axis = static_cast<int>(require_number(g, "n_per_axis"));
        }
        if (g.contains("box_length")) {
            cfg.box_length = require_number(g, "box_length");
        }
    }
    if (j.contains("centers")) {
        const json& c = j.at("centers");
        if (!c.is_array()) throw ConfigError("centers must be an array");
        cfg.centers.clear();
        for (const json& p : c) {
            if (!p.is_array() || p.size() != 3) {
                throw ConfigError("each center must be a 3-vector");
            }
            cfg.centers.push_back({p[0].get<double>(), p[1].get<double>(),
                                   p[2].get<double>()});
        }
    }
    if (j.contains("coupling")) {
        const json& c = j.at("coupling");
        reject_unknown(c, {"a", "schedule", "relative", "a_star"}, "coupling.");
        if (c.contains("a") && c.contains("schedule")) {
            throw ConfigError("coupling: give either a or schedule, not both");
        }
        if (c.contains("a")) {
            cfg.has_a = true;
            cfg.a = require_number(c, "a");
        }
        if (c.contains("schedule")) {
            for (const json& v : c.at("schedule")) {
                cfg.schedule.push_back(v.get<double>());
            }
        }
        if (c.contains("relative")) {
            cfg.schedule_relative = c.at("relative").get<bool>();
        }
        if (c.contains("a_star")) cfg.a_star = require_number(c, "a_star");
    }
    if (j.contains("particle_number")) {
        cfg.particle_number = require_number(j, "particle_number");
    }
    if (j.contains("solver")) {
        const json& s = j.at("solver");
        reject_unknown(s, {"max_iters", "grad_tol", "step_init", "armijo_c",
                           "armijo_shrink", "seed", "scf_mix", "trace"},
                       "solver.");
        if (s.contains("max_iters")) {
            cfg.solver.max_iters = static_cast<int>(require_number(s, "max_iters"));
        }
        if (s.contains("grad_tol")) cfg.solver.grad_tol = require_number(s, "grad_tol");
        if (s.contains("step_init")) cfg.solver.step_init = require_number(s, "step_init");
        if (s.contains("armijo_c")) cfg.solver.armijo_c = require_number(s, "armijo_c");
        if (s.contains("armijo_shrink")) {
            cfg.solver.armijo_shrink = require_number(s, "armijo_shrink");
        }
        if (s.contains("seed")) {
            cfg.solver.seed = s.at("seed").get<unsigned long long>();
        }
        if (s.contains("scf_mix")) cfg.solver.scf_mix = require_number(s, "scf_mix");
        if (s.contains("trace")) cfg.solver.trace = s.at("trace").get<bool>();
    }
    if (j.contains("output_dir")) {
        cfg.output_dir = j.at("output_dir").get<std::string>();
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<unsigned long long>();
    if (j.contains("threads")) {
        cfg.threads = static_cast<int>(require_number(j, "threads"));
    }
    if (j.contains("state_path")) {
        cfg.state_path = j.at("state_path").get<std::string>();
    }
    if (j.contains("t_sweep")) {
        cfg.t_sweep.clear();
        for (const json& v : j.at("t_sweep")) {
            cfg.t_sweep.push_back(v.get<double>());
        }
    }
    validate_run_config(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void validate_run_config(const RunConfig& cfg) {
    if (cfg.n_per_axis < 8 || cfg.n_per_axis % 2 != 0) {
        throw ConfigError("grid.n_per_axis must be even and at least 8");
    }
    int m = cfg.n_per_axis;
    for (int f : {2, 3, 5}) {
        while (m % f == 0) m /= f;
    }
    if (m != 1) {
        throw ConfigError(
            "grid.n_per_axis must factor into 2, 3, 5 (FFT-friendly)");
    }
    if (!(cfg.box_length > 0.0) || !std::isfinite(cfg.box_length)) {
        throw ConfigError("grid.box_length must be positive and finite");
    }
    if (cfg.centers.empty()) {
        throw ConfigError("centers must be nonempty");
    }
    for (const auto& c : cfg.centers) {
        for (double x : c) {
            if (!std::isfinite(x)) throw ConfigError("center coordinates must be finite");
            if (std::abs(x) > 0.5 * cfg.box_length) {
                throw ConfigError("center outside the box");
            }
        }
    }
    for (std::size_t i = 0; i < cfg.centers.size(); ++i) {
        for (std::size_t k = i + 1; k < cfg.centers.size(); ++k) {
            double d2 = 0.0;
            for (int d = 0; d < 3; ++d) {
                double dd = cfg.centers[i][d] - cfg.centers[k][d];
                d2 += dd * dd;
            }
            double h = cfg.box_length / cfg.n_per_axis;
            if (d2 < 0.25 * h * h) {
                throw ConfigError("duplicate centers (closer than spacing/2)");
            }
        }
    }
    if (cfg.has_a && (!(cfg.a >= 0.0) || !std::isfinite(cfg.a))) {
        throw ConfigError("coupling.a must be finite and nonnegative");
    }
    for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
        if (!(cfg.schedule[i] > 0.0)) {
            throw ConfigError("coupling.schedule entries must be positive");
        }
        if (i > 0 && !(cfg.schedule[i] < cfg.schedule[i - 1])) {
            throw ConfigError("coupling.schedule must be strictly decreasing");
        }
    }
    if (cfg.a_star < 0.0 || !std::isfinite(cfg.a_star)) {
        throw ConfigError("coupling.a_star must be finite and nonnegative");
    }
    if (!(cfg.particle_number > 0.0) || !std::isfinite(cfg.particle_number)) {
        throw ConfigError("particle_number must be positive");
    }
    validate_config(cfg.solver);
    if (cfg.output_dir.empty()) {
        throw ConfigError("output_dir must be nonempty");
    }
    if (cfg.threads < 0) {
        throw ConfigError("threads must be nonnegative");
    }
    for (std::size_t i = 0; i < cfg.t_sweep.size(); ++i) {
        if (!(cfg.t_sweep[i] > 0.0)) {
            throw ConfigError("t_sweep entries must be positive");
        }
        if (i > 0 && !(cfg.t_sweep[i] > cfg.t_sweep[i - 1])) {
            throw ConfigError("t_sweep must be strictly increasing");
        }
    }
}

std::string config_to_json(const RunConfig& cfg) {
    json j;
    j["grid"] = {{"n_per_axis", cfg.n_per_axis},
                 {"box_length", cfg.box_length}};
    j["centers"] = json::array();
    for (const auto& c : cfg.centers) {
        j["centers"].push_back({c[0], c[1], c[2]});
    }
    json coupling = json::object();
    if (cfg.has_a) coupling["a"] = cfg.a;
    if (!cfg.schedule.empty()) {
        coupling["schedule"] = cfg.schedule;
        coupling["relative"] = cfg.schedule_relative;
    }
    if (cfg.a_star > 0.0) coupling["a_star"] = cfg.a_star;
    j["coupling"] = coupling;
    j["particle_number"] = cfg.particle_number;
    j["solver"] = {{"max_iters", cfg.solver.max_iters},
                   {"grad_tol", cfg.solver.grad_tol},
                   {"step_init", cfg.solver.step_init},
                   {"armijo_c", cfg.solver.armijo_c},
                   {"armijo_shrink", cfg.solver.armijo_shrink},
                   {"seed", cfg.solver.seed},
                   {"scf_mix", cfg.solver.scf_mix},
                   {"trace", cfg.solver.trace}};
    j["output_dir"] = cfg.output_dir;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    if (!cfg.state_path.empty()) j["state_path"] = cfg.state_path;
    j["t_sweep"] = cfg.t_sweep;
    return j.dump(2);
}

std::string resolved_output_dir(const RunConfig& cfg) {
    const char* env = std::getenv("FERMICRIT_OUTPUT_DIR");
    if (env != nullptr && env[0] != '\0') return env;
    return cfg.output_dir;
}

}  // namespace fermicrit

#include "fermicrit/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fermicrit/energy.hpp"
#include "fermicrit/errors.hpp"

namespace fermicrit {

namespace {

struct ShellProfile {
    std::vector<double> sum;
    std::vector<long> count;
    double width = 0.0;

    double average(int b) const {
        return count[b] > 0 ? sum[b] / static_cast<double>(count[b]) : 0.0;
    }
};

// Shell accumulation of |f| by min-image radius from a reference node.
ShellProfile shell_profile(const Field& f, const std::array<int, 3>& ref,
                           bool absolute) {
    const GridPtr& g = f.grid;
    ShellProfile prof;
    prof.width = g->spacing();
    int nb = g->n / 2 + 2;
    prof.sum.assign(nb, 0.0);
    prof.count.assign(nb, 0);
    double cx = g->coord(ref[0]), cy = g->coord(ref[1]), cz = g->coord(ref[2]);
    for (int ix = 0; ix < g->n; ++ix) {
        double dx = min_image_delta(g->coord(ix) - cx, g->box);
        for (int iy = 0; iy < g->n; ++iy) {
            double dy = min_image_delta(g->coord(iy) - cy, g->box);
            for (int iz = 0; iz < g->n; ++iz) {
                double dz = min_image_delta(g->coord(iz) - cz, g->box);
                double r = std::sqrt(dx * dx + dy * dy + dz * dz);
                int b = static_cast<int>(r / prof.width);
                if (b >= nb) continue;
                double v = f.at(ix, iy, iz);
                prof.sum[b] += absolute ? std::abs(v) : v;
                prof.count[b] += 1;
            }
        }
    }
    return prof;
}

// Radius where the shell-averaged density first drops below half its peak.
double half_max_radius(const Field& rho) {
    std::array<int, 3> peak = density_argmax(rho);
    double pv = rho.at(peak[0], peak[1], peak[2]);
    if (!(pv > 0.0)) {
        throw DomainError("rescale_minimizer: density is identically zero");
    }
    ShellProfile prof = shell_profile(rho, peak, false);
    for (std::size_t b = 0; b < prof.sum.size(); ++b) {
        if (prof.count[b] > 0 && prof.average(b) < 0.5 * pv) {
            return (static_cast<double>(b) + 0.5) * prof.width;
        }
    }
    return 0.25 * rho.grid->box;
}

struct RadialMoments {
    double mass = 0.0;
    double inverse = 0.0;  // int |x|^{-1} rho, |x| floored at spacing/2
    double second = 0.0;   // int |x|^2 rho
};

RadialMoments moments_about(const Field& rho, const std::array<int, 3>& ref) {
    const GridPtr& g = rho.grid;
    RadialMoments m;
    double h = g->spacing();
    double cx = g->coord(ref[0]), cy = g->coord(ref[1]), cz = g->coord(ref[2]);
    long double mass = 0.0L, inv = 0.0L, second = 0.0L;
    for (int ix = 0; ix < g->n; ++ix) {
        double dx = min_image_delta(g->coord(ix) - cx, g->box);
        for (int iy = 0; iy < g->n; ++iy) {
            double dy = min_image_delta(g->coord(iy) - cy, g->box);
            for (int iz = 0; iz < g->n; ++iz) {
                double dz = min_image_delta(g->coord(iz) - cz, g->box);
                double r = std::max(std::sqrt(dx * dx + dy * dy + dz * dz),
                                    0.5 * h);
                double v = rho.at(ix, iy, iz);
                mass += v;
                inv += v / r;
                second += v * r * r;
            }
        }
    }
    double vol = g->cell_volume();
    m.mass = static_cast<double>(mass) * vol;
    m.inverse = static_cast<double>(inv) * vol;
    m.second = static_cast<double>(second) * vol;
    return m;
}

}  // namespace

DensityMatrix rescale_minimizer(const GroundState& state, double a_star,
                                double a, const std::array<double, 3>& center,
                                GridPtr w_grid) {
    if (!(a_star > 0.0) || !(a < a_star)) {
        throw ConfigError("rescale_minimizer: requires 0 < a_star and a < a_star");
    }
    const DensityMatrix& gamma = state.gamma;
    if (gamma.orbitals.empty()) {
        throw ConfigError("rescale_minimizer: state has no orbitals");
    }
    const GridPtr& gu = gamma.orbitals.front().grid;
    for (double c : center) {
        if (std::abs(c) > 0.5 * gu->box) {
            throw ConfigError("rescale_minimizer: center outside the box");
        }
    }
    double eps = a_star - a;
    Field rho = density(gamma);
    double r_half = half_max_radius(rho);
    if (r_half < 4.0 * gu->spacing()) {
        throw ResolutionError(
            "rescale_minimizer: concentration core spans fewer than 4 cells; "
            "refine the source grid");
    }
    if (!w_grid) {
        double box_w = std::min(8.0 * r_half, gu->box) / eps;
        w_grid = make_grid(gu->n, box_w);
    }
    double jac = std::pow(eps, 1.5);
    DensityMatrix w;
    w.occupations = gamma.occupations;
    for (const Field& u : gamma.orbitals) {
        Field wi = make_field(w_grid);
        for (int ix = 0; ix < w_grid->n; ++ix) {
            double x = eps * w_grid->coord(ix) + center[0];
            for (int iy = 0; iy < w_grid->n; ++iy) {
                double y = eps * w_grid->coord(iy) + center[1];
                for (int iz = 0; iz < w_grid->n; ++iz) {
                    double z = eps * w_grid->coord(iz) + center[2];
                    wi.at(ix, iy, iz) = jac * sample_trilinear(u, x, y, z);
                }
            }
        }
        w.orbitals.push_back(std::move(wi));
    }
    return w;
}

std::map<std::string, double> verify_identities(const DensityMatrix& rescaled,
                                                double a_star) {
    if (!(a_star > 0.0)) {
        throw ConfigError("verify_identities: a_star must be positive");
    }
    Field rho = density(rescaled);
    std::array<int, 3> peak = density_argmax(rho);
    RadialMoments mom = moments_about(rho, peak);
    double p53 = p53_integral(rho);
    if (!(mom.mass > 0.0) || !(p53 > 0.0)) {
        throw DomainError("verify_identities: density is identically zero");
    }
    double kinetic = 0.0;
    for (std::size_t i = 0; i < rescaled.orbitals.size(); ++i) {
        kinetic += rescaled.occupations[i] *
                   kinetic_quadratic_form(rescaled.orbitals[i]);
    }
    std::map<std::string, double> out;
    out["virial"] = std::abs(mom.inverse - 2.0 * p53) / p53;
    out["energy_law"] = std::abs(kinetic / a_star - p53) / p53;
    return out;
}

std::vector<double> fit_tail_rates(const GroundState& state) {
    const DensityMatrix& gamma = state.gamma;
    Field rho = density(gamma);
    const GridPtr& g = rho.grid;
    std::array<int, 3> peak = density_argmax(rho);
    double pv = rho.at(peak[0], peak[1], peak[2]);
    if (!(pv > 0.0)) {
        throw DiagnosticError("fit_tail_rates: density is identically zero");
    }
    double boundary = 0.0;
    for (int i = 0; i < g->n; ++i) {
        for (int j = 0; j < g->n; ++j) {
            boundary = std::max(boundary, std::abs(rho.at(0, i, j)));
            boundary = std::max(boundary, std::abs(rho.at(i, 0, j)));
            boundary = std::max(boundary, std::abs(rho.at(i, j, 0)));
        }
    }
    if (boundary >= 1e-6 * pv) {
        throw DiagnosticError(
            "fit_tail_rates: boundary density above 1e-6 of peak; enlarge the "
            "box");
    }
    RadialMoments mom = moments_about(rho, peak);
    double sigma = std::sqrt(mom.second / mom.mass);
    double h = g->spacing();
    double lo = 2.0 * sigma;
    double hi = 0.5 * g->box - 2.0 * h;
    if (!(lo < hi)) {
        throw DiagnosticError("fit_tail_rates: radial window empty; box too "
                              "small for the state's width");
    }

    std::vector<double> rates;
    for (const Field& u : gamma.orbitals) {
        ShellProfile prof = shell_profile(u, peak, true);
        // Least squares of log(shell average) against radius.
        double sr = 0.0, sl = 0.0, srr = 0.0, srl = 0.0;
        long npt = 0;
        for (std::size_t b = 0; b < prof.sum.size(); ++b) {
            double r = (static_cast<double>(b) + 0.5) * prof.width;
            if (r < lo || r > hi || prof.count[b] == 0) continue;
            double avg = prof.average(b);
            if (!(avg > 0.0)) continue;
            double l = std::log(avg);
            sr += r;
            sl += l;
            srr += r * r;
            srl += r * l;
            ++npt;
        }
        if (npt < 3) {
            throw DiagnosticError(
                "fit_tail_rates: fewer than 3 usable shells in the window");
        }
        double denom = npt * srr - sr * sr;
        double slope = (npt * srl - sr * sl) / denom;
        rates.push_back(-slope);
    }
    return rates;
}

RankClassification classify_rank_degeneracy(const DensityMatrix& rescaled,
                                            double tol) {
    if (rescaled.rank() != 3) {
        throw ConfigError("classify_rank_degeneracy: requires a rank-3 family");
    }
    if (!(tol > 0.0)) {
        throw ConfigError("classify_rank_degeneracy: tol must be positive");
    }
    const Field& w1 = rescaled.orbitals[0];
    const Field& w2 = rescaled.orbitals[1];
    const Field& w3 = rescaled.orbitals[2];
    require_same_grid(w1, w2, "classify_rank_degeneracy");
    require_same_grid(w1, w3, "classify_rank_degeneracy");

    RankClassification out;
    out.rank_found = rank_diagnostic(rescaled.orbitals, tol);
    double n1 = norm_l2(w1), n2 = norm_l2(w2), n3 = norm_l2(w3);
    out.case2_norm = n3;
    out.case1_residual = std::numeric_limits<double>::quiet_NaN();
    if (out.rank_found >= 3) {
        out.label = "full_rank";
        return out;
    }

    double g12 = inner_product(w1, w2);
    double g13 = inner_product(w1, w3);
    bool w1_unit = std::abs(n1 - 1.0) < tol;

    if (n3 < tol && w1_unit && std::abs(n2 - 1.0) < tol &&
        std::abs(g12) < tol) {
        out.label = "case2";
        return out;
    }

    if (n3 >= tol && n2 > 0.0) {
        double arg = std::max(1.0 / (n2 * n2) - 1.0, 0.0);
        double c = std::sqrt(arg);
        double best = std::numeric_limits<double>::infinity();
        for (double sign : {1.0, -1.0}) {
            Field d = w3;
            axpy(-sign * c, w2, d);
            best = std::min(best, norm_l2(d) / n3);
        }
        out.case1_residual = best;
        if (best < tol && w1_unit && std::abs(g12) < tol &&
            std::abs(g13) < tol) {
            out.label = "case1";
            return out;
        }
    }
    out.label = "inconclusive";
    return out;
}

std::vector<BlowupRecord> run_continuation(int n, const PotentialSpec& pot,
                                           double a_star,
                                           const std::vector<double>& eps_schedule,
                                           const SolverConfig& cfg) {
    validate_config(cfg);
    if (n != 2 && n != 3) {
        throw ConfigError("run_continuation: n must be 2 or 3");
    }
    if (!(a_star > 0.0)) {
        throw ConfigError("run_continuation: a_star must be positive");
    }
    if (eps_schedule.empty()) {
        throw ConfigError("run_continuation: empty schedule");
    }
    for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
        if (!(eps_schedule[i] > 0.0)) {
            throw ConfigError("run_continuation: schedule must be positive");
        }
        if (i > 0 && !(eps_schedule[i] < eps_schedule[i - 1])) {
            throw ConfigError("run_continuation: schedule must decrease");
        }
    }
    if (!(eps_schedule.front() < a_star)) {
        throw ConfigError("run_continuation: largest eps must stay below a_star");
    }

    std::vector<BlowupRecord> records;
    DensityMatrix warm;
    bool have_warm = false;
    GridPtr w_grid;

    for (double eps : eps_schedule) {
        double a = a_star - eps;
        GroundState gs = minimize(pot, a, static_cast<double>(n), cfg,
                                  have_warm ? &warm : nullptr);
        gs = scf_refine(gs, pot, a, cfg);
        warm = gs.gamma;
        have_warm = true;

        BlowupRecord rec;
        rec.a = a;
        rec.eps = eps;
        rec.energy_total = gs.breakdown.total;
        rec.scaled_energy = eps * gs.breakdown.total;
        rec.breakdown = gs.breakdown;
        rec.converged = gs.converged;

        Field rho = density(gs.gamma);
        std::array<int, 3> peak = density_argmax(rho);
        const GridPtr& gu = rho.grid;
        rec.concentration_center = {gu->coord(peak[0]), gu->coord(peak[1]),
                                    gu->coord(peak[2])};
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < pot.centers.size(); ++k) {
            double d =
                min_image_distance(*gu, rec.concentration_center, pot.centers[k]);
            if (d < best) {
                best = d;
                rec.nearest_center_index = static_cast<int>(k) + 1;
            }
        }

        try {
            rec.rescaled = rescale_minimizer(gs, a_star, a,
                                             rec.concentration_center, w_grid);
            if (!w_grid) w_grid = rec.rescaled.orbitals.front().grid;
            rec.gram_dev_max = gram_identity_deviation(rec.rescaled);
            rec.rank_found = rank_diagnostic(rec.rescaled.orbitals, 1e-2);
            rec.identity_residuals = verify_identities(rec.rescaled, a_star);
        } catch (const ResolutionError&) {
            // Core narrower than the frame resolves: keep the raw-side data,
            // leave the rescaled family empty and its diagnostics unset.
            rec.rescaled = DensityMatrix{};
            rec.gram_dev_max = std::numeric_limits<double>::quiet_NaN();
            rec.rank_found = 0;
        }
        try {
            rec.tail_rates = fit_tail_rates(gs);
        } catch (const DiagnosticError&) {
            rec.tail_rates.assign(gs.gamma.rank(),
                                  std::numeric_limits<double>::quiet_NaN());
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace fermicrit

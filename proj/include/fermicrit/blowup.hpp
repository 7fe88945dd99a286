#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "fermicrit/potential.hpp"
#include "fermicrit/solver.hpp"
#include "fermicrit/state.hpp"

namespace fermicrit {

// Per-coupling snapshot of the continuation a -> a_star. The rescaled family
// is stored exactly as resampled (no re-orthonormalization): near a rank
// collapse the Gram matrix is close to singular and cleaning it would destroy
// the degeneracy structure the diagnostics are after. gram_dev_max records
// how far the raw family is from orthonormal.
struct BlowupRecord {
    double a = 0.0;
    double eps = 0.0;            // scheduled a_star - a
    double energy_total = 0.0;
    double scaled_energy = 0.0;  // eps * energy_total
    EnergyBreakdown breakdown;
    DensityMatrix rescaled;      // w_i on the shared w-frame
    std::array<double, 3> concentration_center{};  // raw density argmax
    int nearest_center_index = 0;                  // 1-based into pot.centers
    std::map<std::string, double> identity_residuals;  // virial, energy_law
    int rank_found = 0;
    std::vector<double> tail_rates;  // NaN where the fit was not computable
    double gram_dev_max = 0.0;
    bool converged = false;
};

// w_i(x) = eps^{3/2} u_i(eps x + center), eps = a_star - a, resampled by
// periodic trilinear interpolation. With w_grid null a fresh frame is built:
// same resolution, box sized so the rescaled core spans about a quarter of
// it. Passing w_grid pins the frame (continuation records share one frame).
// Throws ResolutionError when the source core is under-resolved (half-max
// radius below 4 spacings), ConfigError on a >= a_star or center outside the
// source box.
DensityMatrix rescale_minimizer(const GroundState& state, double a_star,
                                double a, const std::array<double, 3>& center,
                                GridPtr w_grid = nullptr);

// Sweep a = a_star - eps over the (positive, strictly decreasing) schedule,
// warm-starting each minimization from the previous one and polishing with
// scf_refine. The w-frame is fixed by the first record that rescales. A
// record whose minimization did not converge is flagged and the sweep
// proceeds; likewise a record whose core is too narrow to rescale keeps its
// raw-side fields but an empty rescaled family (rank_found 0, NaN gram).
std::vector<BlowupRecord> run_continuation(int n, const PotentialSpec& pot,
                                           double a_star,
                                           const std::vector<double>& eps_schedule,
                                           const SolverConfig& cfg);

// Residuals of the limit identities (1/a*) Tr(-Delta gamma) = int rho^{5/3}
// = (1/2) int |x|^{-1} rho, with |x| measured (min-image) from the density
// argmax: {"virial": |C - 2P| / P, "energy_law": |T/a* - P| / P}.
// Throws DomainError on zero density.
std::map<std::string, double> verify_identities(const DensityMatrix& rescaled,
                                                double a_star);

// Per-orbital exponential decay rates: least-squares slope of log shell
// averages of |u_i| against radius from the density argmax, over the window
// [2 sigma, box/2 - 2 spacings] with sigma the density rms radius. Throws
// DiagnosticError when the window is empty or the boundary density exceeds
// 1e-6 of the peak.
std::vector<double> fit_tail_rates(const GroundState& state);

struct RankClassification {
    int rank_found = 0;
    std::string label;            // full_rank | case1 | case2 | inconclusive
    double case1_residual = 0.0;  // min over signs of ||w3 -+ c w2|| / ||w3||
    double case2_norm = 0.0;      // ||w3||_2
};

// Theorem-style rank-2 dichotomy for an N = 3 rescaled family: either
// w3 = +-sqrt(||w2||^{-2} - 1) w2 with (w1, w_j) orthonormal-ish (case1), or
// w3 = 0 with w1, w2 orthonormal (case2). Full numerical rank skips the case
// tests. Diagnostic: never throws on data, only on rank() != 3.
RankClassification classify_rank_degeneracy(const DensityMatrix& rescaled,
                                            double tol);

}  // namespace fermicrit

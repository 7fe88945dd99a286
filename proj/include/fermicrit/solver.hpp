#pragma once

#include <vector>

#include "fermicrit/energy.hpp"
#include "fermicrit/potential.hpp"
#include "fermicrit/state.hpp"

namespace fermicrit {

struct SolverConfig {
    int max_iters = 600;
    double grad_tol = 1e-6;        // tangent-gradient stopping norm
    double step_init = 0.2;
    double armijo_c = 1e-4;
    double armijo_shrink = 0.5;
    unsigned long long seed = 1;   // orbital initialization
    double scf_mix = 0.5;
    bool trace = false;            // emit per-iteration CSV rows
};

void validate_config(const SolverConfig& cfg);

struct TraceRow {
    int iteration = 0;
    double energy = 0.0;
    double grad_norm = 0.0;
    double step = 0.0;
};

struct GroundState {
    DensityMatrix gamma;
    EnergyBreakdown breakdown;
    std::vector<double> multipliers;  // ascending at convergence
    std::vector<double> residuals;    // ||H u_i - mu_i u_i|| per orbital
    int iterations = 0;
    bool converged = false;
    std::vector<TraceRow> trace;
};

// Projected-gradient descent on the Stiefel manifold: tangent projection with
// the symmetrized multiplier matrix, Armijo backtracking, Loewdin retraction.
// Occupations follow the fixed layout (unit except a fractional last orbital).
GroundState minimize(const PotentialSpec& pot, double a, double lambda,
                     const SolverConfig& cfg,
                     const DensityMatrix* warm_start = nullptr);

// Rotate orbitals within equal-occupation blocks to diagonalize the
// symmetrized matrix <u_i, (-Delta + veff) u_j> (rotations across different
// occupations would change gamma). Fills `multipliers` with the ascending
// eigenvalues of the full matrix and `residuals` with the per-orbital
// ||H u_i - mu_i u_i|| against the block eigenvalues.
void extract_multipliers(DensityMatrix& gamma, const Field& veff,
                         std::vector<double>& multipliers,
                         std::vector<double>& residuals);

// Fixed-point refinement: diagonalize the frozen mean-field operator with a
// block eigensolver (rank+2 probes), mix densities, repeat. Returns a state
// with residuals reduced or unchanged (the input when refinement worsens them).
GroundState scf_refine(const GroundState& state, const PotentialSpec& pot,
                       double a, const SolverConfig& cfg);

struct NonexistPoint {
    double t = 0.0;
    double energy = 0.0;
    bool truncated = false;  // dilation offset beyond the optimizer half-box
};

// Energy of the dilated family gamma_t built from a critical-coupling
// optimizer placed at the first Coulomb center, via the exact scaling
// identity E(t) = tau^2 (T0 - a P0) - tau sum_k C0(tau (y_k - y_1)) with
// tau = t * s_pin. The base scale s_pin = C0 / (2 (a - a*) P0) balances the
// supercritical quadratic term against the Coulomb moment (gauge-invariant in
// the stored state); at a = a* it falls back to the virial scale C0 / (2 P0).
// Requires a >= a_star_est.
std::vector<NonexistPoint> nonexistence_demo(const PotentialSpec& pot, double a,
                                             const std::vector<double>& t_sweep,
                                             const DensityMatrix& optimizer,
                                             double a_star_est);

}  // namespace fermicrit

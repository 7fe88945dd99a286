#pragma once

#include <vector>

#include "fermicrit/solver.hpp"
#include "fermicrit/state.hpp"

namespace fermicrit {

struct CriticalEstimate {
    int n = 0;
    double a_star = 0.0;
    DensityMatrix optimizer;  // the Q_i family, unit occupations
    int rank_found = 0;
    double residual = 0.0;    // Q-system E-L residual relative to ||Q||_H1
};

// Minimize the scale-invariant ratio Tr(-Delta gamma) / int rho^{5/3} over
// orthonormal rank-n families with unit occupations (||gamma|| = 1 per the
// optimizer structure theorem): gradient flow on the log ratio with Loewdin
// retraction, per-step integer-cell recentering of the density centroid, and
// an occasional width re-gauge. Restarts with fresh seeds (up to 5) when the
// iterate drifts to zero or degenerates.
CriticalEstimate estimate_a_star(int n, const GridPtr& grid,
                                 const SolverConfig& cfg);

struct LTEstimate {
    int n = 0;
    double l_star = 0.0;
    Field potential;                  // optimal W >= 0
    std::vector<double> eigenvalues;  // ascending, each <= 0, zero when absent
    bool degenerate = false;          // stalled with fewer than n bound states
};

// Maximize [sum_{j<=n} |lambda_j(-Delta - W)|_-] / int W^{5/2} over W >= 0 by
// projected gradient ascent: the eigenvalue-sum gradient is sum_j psi_j^2
// (first-order perturbation), the constraint is enforced by clipping, steps
// halve whenever the objective decreases.
LTEstimate estimate_l_star(int n, const GridPtr& grid, const SolverConfig& cfg);

// Relative departure of a_star * l_star^{2/3} from (3/5)(2/5)^{2/3}.
double duality_check(const CriticalEstimate& a_est, const LTEstimate& l_est);

}  // namespace fermicrit

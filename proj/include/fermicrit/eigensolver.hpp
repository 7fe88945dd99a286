#pragma once

#include <vector>

#include "fermicrit/grid.hpp"
#include "fermicrit/rng.hpp"

namespace fermicrit {

struct EigenResult {
    std::vector<Field> vectors;   // orthonormal, aligned with values
    std::vector<double> values;   // ascending
    int iterations = 0;
    bool converged = false;
};

// Lowest `nev` eigenpairs of f -> -Delta f + veff * f, computed by a block
// Rayleigh-Ritz iteration (LOBPCG-style: current block, preconditioned
// residuals, previous block) with nev+2 probe vectors so no low eigenvalue is
// missed, preconditioned by (-Delta + sigma)^{-1}. Deterministic for a given
// rng state and warm start.
EigenResult lowest_eigenpairs(const Field& veff, int nev, double tol,
                              int max_iters, Rng& rng,
                              const std::vector<Field>* warm = nullptr);

}  // namespace fermicrit

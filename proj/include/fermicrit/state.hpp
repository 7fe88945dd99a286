#pragma once

#include <array>
#include <string>
#include <vector>

#include "fermicrit/grid.hpp"

namespace fermicrit {

// Finite-rank density matrix gamma = sum_i n_i |u_i><u_i|. Occupations lie in
// [0,1]; the standard layout for particle number lambda is n_1 = ... =
// n_{N'-1} = 1 and n_{N'} = lambda - N' + 1 with N' = ceil(lambda).
struct DensityMatrix {
    std::vector<Field> orbitals;
    std::vector<double> occupations;

    int rank() const { return static_cast<int>(orbitals.size()); }
    double trace() const;
};

// Occupation vector of the standard layout for particle number lambda.
std::vector<double> occupation_layout(double lambda);

// rho_gamma(x) = sum_i n_i u_i(x)^2, nonnegative by construction.
Field density(const DensityMatrix& gamma);

// Gram matrix <u_i, u_j>, row-major rank x rank.
std::vector<double> gram_matrix(const DensityMatrix& gamma);
double gram_identity_deviation(const DensityMatrix& gamma);  // max |G - I|

// Loewdin (symmetric) orthonormalization: orbitals <- orbitals * G^{-1/2}.
// Throws RankDeficiencyError when the Gram matrix has an eigenvalue <= 1e-12.
DensityMatrix orthonormalize(const DensityMatrix& gamma);

// Operator norm max_i n_i; requires orthonormalized input.
double operator_norm(const DensityMatrix& gamma);

// Numerical rank of the span: Gram eigenvalues > tol * largest.
int rank_diagnostic(const std::vector<Field>& orbitals, double tol = 1e-6);

// Grid indices of the density maximum (first in scan order on ties).
std::array<int, 3> density_argmax(const Field& rho);

// Binary container round trip (header: grid dims, box, rank, occupations;
// payload: orbital arrays as little-endian float64).
void save_state(const std::string& path, const DensityMatrix& gamma);
DensityMatrix load_state(const std::string& path);

}  // namespace fermicrit

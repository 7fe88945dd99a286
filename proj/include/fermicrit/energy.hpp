#pragma once

#include <vector>

#include "fermicrit/potential.hpp"
#include "fermicrit/state.hpp"

namespace fermicrit {

// Terms of E_a(gamma) = Tr((-Delta + V) gamma) - a int rho^{5/3}.
struct EnergyBreakdown {
    double kinetic = 0.0;    // sum n_i <u_i, -Delta u_i>
    double external = 0.0;   // int V rho
    double nonlinear = 0.0;  // int rho^{5/3}
    double coupling = 0.0;   // a
    double total = 0.0;      // kinetic + external - a * nonlinear
};

EnergyBreakdown energy(const DensityMatrix& gamma, const PotentialSpec& pot,
                       double a);

// int rho^{5/3}; rho^{2/3} is taken as 0 where rho underflows below 1e-300.
double p53_integral(const Field& rho);

// V - (5a/3) rho^{2/3}: the multiplicative part of the mean-field operator.
Field effective_potential(const PotentialSpec& pot, const Field& rho, double a);

// -Delta f + veff * f for a precomputed effective potential.
Field apply_hamiltonian(const Field& veff, const Field& f);

// (-Delta + V - (5a/3) rho_gamma^{2/3}) f.
Field mean_field_apply(const DensityMatrix& gamma, const PotentialSpec& pot,
                       double a, const Field& f);

// Unconstrained L2 gradient g_i = 2 n_i H_V u_i (occupations frozen).
std::vector<Field> gradient(const DensityMatrix& gamma,
                            const PotentialSpec& pot, double a);

// Tr(-Delta gamma) - int |grad sqrt(rho)|^2; nonnegative up to discretization.
double hoffmann_ostenhof_check(const DensityMatrix& gamma);

}  // namespace fermicrit

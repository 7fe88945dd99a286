#pragma once

#include <vector>

namespace fermicrit::radial {

// Lowest `count` Dirichlet eigenvalues of -y'' + [l(l+1)/r^2 - 1/r] y on
// (0, rmax), uniform finite differences with Sturm-sequence bisection.
// These approximate the -Delta - 1/|x| levels in angular channel ell.
std::vector<double> hydrogen_levels(int ell, int count, double rmax = 80.0,
                                    int n = 16000);

struct CriticalProfile {
    double amplitude = 0.0;   // W(0)
    double mass = 0.0;        // 4pi int W^2 r^2 dr
    double kinetic = 0.0;     // 4pi int W'^2 r^2 dr
    double p53 = 0.0;         // 4pi int W^{10/3} r^2 dr
    double coulomb = 0.0;     // 4pi int W^2 r dr
    double a_star = 0.0;      // kinetic * mass^{2/3} / p53
    double rms_radius = 0.0;
    std::vector<double> r;
    std::vector<double> w;
};

// Shooting solve of the radial profile equation
//     W'' + (2/r) W' - W + W^{7/3} = 0,  W'(0) = 0,  W(r) -> 0,
// whose integrals pin the rank-1 critical coupling.
CriticalProfile critical_profile(double rmax = 25.0, double step = 2e-4,
                                 int bisections = 80);

// Radial quadrature reference for the energy of the normalized Gaussian
// u(x) = (pi w^2)^{-3/4} exp(-|x|^2 / (2 w^2)) with one Coulomb center at its
// peak: returns {kinetic, external, nonlinear} as plain 1-D integrals.
struct GaussianEnergy {
    double kinetic = 0.0;
    double external = 0.0;
    double nonlinear = 0.0;
    double total(double a) const { return kinetic + external - a * nonlinear; }
};
GaussianEnergy gaussian_energy_reference(double width);

// (3/5)(2/5)^{2/3}: the product a*_n (L*_n)^{2/3} for every rank.
double duality_constant();

double l_star_rank1(double a_star);

// Lowest `count` eigenvalues of the dense 1-D Hamiltonian -d^2/dx^2 + diag(v)
// on n periodic points over a box of side `box`, with the same Fourier
// multipliers the 3-D grid uses per axis. Dense reference for the iterative
// 3-D eigensolver via separable potentials.
std::vector<double> spectral_levels_1d(const std::vector<double>& v, double box,
                                       int count);

}  // namespace fermicrit::radial

#include "fermicrit/energy.hpp"

#include <cmath>

#include "fermicrit/errors.hpp"

namespace fermicrit {

namespace {

double pow_two_thirds(double rho) {
    if (rho < 1e-300) return 0.0;
    double c = std::cbrt(rho);
    return c * c;
}

}  // namespace

double p53_integral(const Field& rho) {
    long double acc = 0.0L, comp = 0.0L;
    for (double x : rho.v) {
        long double term = static_cast<long double>(x) * pow_two_thirds(x) - comp;
        long double next = acc + term;
        comp = (next - acc) - term;
        acc = next;
    }
    return static_cast<double>(acc) * rho.grid->cell_volume();
}

EnergyBreakdown energy(const DensityMatrix& gamma, const PotentialSpec& pot,
                       double a) {
    if (!(a >= 0.0)) {
        throw ConfigError("energy: coupling must be nonnegative");
    }
    require_same_grid(gamma.orbitals.at(0), pot.values, "energy");
    EnergyBreakdown b;
    b.coupling = a;
    for (int i = 0; i < gamma.rank(); ++i) {
        b.kinetic +=
            gamma.occupations[i] * kinetic_quadratic_form(gamma.orbitals[i]);
    }
    Field rho = density(gamma);
    b.external = inner_product(pot.values, rho);
    b.nonlinear = p53_integral(rho);
    b.total = b.kinetic + b.external - a * b.nonlinear;
    return b;
}

Field effective_potential(const PotentialSpec& pot, const Field& rho, double a) {
    require_same_grid(pot.values, rho, "effective_potential");
    Field veff = pot.values;
    double c = 5.0 * a / 3.0;
    for (std::size_t p = 0; p < veff.v.size(); ++p) {
        veff.v[p] -= c * pow_two_thirds(rho.v[p]);
    }
    return veff;
}

Field apply_hamiltonian(const Field& veff, const Field& f) {
    require_same_grid(veff, f, "apply_hamiltonian");
    Field out = apply_laplacian(f);
    for (std::size_t p = 0; p < out.v.size(); ++p) {
        out.v[p] += veff.v[p] * f.v[p];
    }
    return out;
}

Field mean_field_apply(const DensityMatrix& gamma, const PotentialSpec& pot,
                       double a, const Field& f) {
    require_same_grid(gamma.orbitals.at(0), f, "mean_field_apply");
    Field veff = effective_potential(pot, density(gamma), a);
    return apply_hamiltonian(veff, f);
}

std::vector<Field> gradient(const DensityMatrix& gamma, const PotentialSpec& pot,
                            double a) {
    require_same_grid(gamma.orbitals.at(0), pot.values, "gradient");
    Field veff = effective_potential(pot, density(gamma), a);
    std::vector<Field> g;
    g.reserve(gamma.rank());
    for (int i = 0; i < gamma.rank(); ++i) {
        Field gi = apply_hamiltonian(veff, gamma.orbitals[i]);
        scale(gi, 2.0 * gamma.occupations[i]);
        g.push_back(std::move(gi));
    }
    return g;
}

double hoffmann_ostenhof_check(const DensityMatrix& gamma) {
    Field rho = density(gamma);
    Field root = rho;
    for (double& x : root.v) x = std::sqrt(std::max(x, 0.0));
    double trace_kinetic = 0.0;
    for (int i = 0; i < gamma.rank(); ++i) {
        trace_kinetic +=
            gamma.occupations[i] * kinetic_quadratic_form(gamma.orbitals[i]);
    }
    return trace_kinetic - kinetic_quadratic_form(root);
}

}  // namespace fermicrit

#include <doctest.h>

#include <cmath>

#include "fermicrit/energy.hpp"
#include "fermicrit/errors.hpp"
#include "fermicrit/radial.hpp"
#include "fermicrit/rng.hpp"

#include "helpers.hpp"

using namespace fermicrit;
using namespace fermicrit::testing;

TEST_SUITE("energy") {

TEST_CASE("constant density: nonlinear term in closed form") {
    GridPtr g = make_grid(8, 2.0);
    PotentialSpec pot = build_coulomb(g, {{0.0, 0.0, 0.0}});
    Field u = make_field(g);
    double omega = g->box * g->box * g->box;
    for (double& x : u.v) x = 1.0 / std::sqrt(omega);
    DensityMatrix dm = family({u}, {1.0});
    EnergyBreakdown e = energy(dm, pot, 0.3);
    // rho = 1/8 everywhere: int rho^{5/3} = 8^{-2/3} = 1/4.
    CHECK(e.nonlinear == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(std::abs(e.kinetic) < 1e-10);
    CHECK(e.external < 0.0);
    CHECK(e.coupling == doctest::Approx(0.3));
    CHECK(p53_integral(density(dm)) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("gaussian at a center matches the radial quadrature") {
    GridPtr g = make_grid(96, 12.0);
    PotentialSpec pot = build_coulomb(g, {{0.0, 0.0, 0.0}});
    DensityMatrix dm = family({gaussian(g, 1.0)}, {1.0});
    radial::GaussianEnergy ref = radial::gaussian_energy_reference(1.0);
    EnergyBreakdown e = energy(dm, pot, 0.5);
    CHECK(rel_err(e.kinetic, ref.kinetic) < 0.005);
    CHECK(rel_err(e.external, ref.external) < 0.005);
    CHECK(rel_err(e.nonlinear, ref.nonlinear) < 0.005);
    CHECK(rel_err(e.total, ref.total(0.5)) < 0.005);
}

TEST_CASE("breakdown invariants on random states") {
    GridPtr g = make_grid(16, 12.0);
    PotentialSpec pot =
        build_coulomb(g, {{-1.5, 0.0, 0.0}, {1.5, 0.5, 0.0}});
    Rng rng(2);
    for (int trial = 0; trial < 3; ++trial) {
        DensityMatrix dm = orthonormalize(
            family({unit_noise(g, rng), unit_noise(g, rng)}, {1.0, 0.5}));
        EnergyBreakdown e = energy(dm, pot, 0.8);
        CHECK(e.kinetic >= 0.0);
        CHECK(e.external <= 0.0);
        CHECK(e.nonlinear >= 0.0);
        double recompute = e.kinetic + e.external - e.coupling * e.nonlinear;
        CHECK(std::abs(e.total - recompute) <=
              1e-12 * (1.0 + std::abs(e.total)));
    }
}

TEST_CASE("mean-field operator: decomposition and self-adjointness") {
    GridPtr g = make_grid(32, 16.0);
    PotentialSpec pot = build_coulomb(g, {{-4.0, 0.0, 0.0}});
    Field f = gaussian(g, 1.0, 4.0, 0.0, 0.0);
    DensityMatrix dm = family({f}, {1.0});

    // a = 0: H f = -Delta f + V f exactly.
    Field hf = mean_field_apply(dm, pot, 0.0, f);
    Field lf = apply_laplacian(f);
    Field vf = pot.values;
    for (std::size_t i = 0; i < vf.v.size(); ++i) vf.v[i] *= f.v[i];
    Field resid = hf;
    axpy(-1.0, lf, resid);
    axpy(-1.0, vf, resid);
    CHECK(norm_l2(resid) < 1e-12 * (1.0 + norm_l2(hf)));
    // Far-away center: the Coulomb correction is a small bounded tail.
    CHECK(norm_l2(vf) < 0.3);

    // apply_hamiltonian with the effective potential is the same operator.
    Field veff = effective_potential(pot, density(dm), 0.7);
    Field h1 = apply_hamiltonian(veff, f);
    Field h2 = mean_field_apply(dm, pot, 0.7, f);
    axpy(-1.0, h1, h2);
    CHECK(norm_l2(h2) < 1e-12 * (1.0 + norm_l2(h1)));

    // veff = V - (5a/3) rho^{2/3} pointwise.
    Field rho = density(dm);
    std::size_t mid = rho.v.size() / 2;
    CHECK(veff.v[mid] ==
          doctest::Approx(pot.values.v[mid] -
                          (5.0 * 0.7 / 3.0) * std::pow(rho.v[mid], 2.0 / 3.0))
              .epsilon(1e-12));

    Rng rng(4);
    Field p = unit_noise(g, rng);
    Field q = unit_noise(g, rng);
    Field hp = mean_field_apply(dm, pot, 0.7, p);
    Field hq = mean_field_apply(dm, pot, 0.7, q);
    CHECK(std::abs(inner_product(p, hq) - inner_product(hp, q)) < 1e-10);
}

TEST_CASE("gradient: finite differences and affinity in the coupling") {
    GridPtr g = make_grid(16, 10.0);
    PotentialSpec pot = build_coulomb(g, {{0.0, 0.0, 0.0}});
    Rng rng(6);
    for (int trial = 0; trial < 3; ++trial) {
        DensityMatrix dm = orthonormalize(
            family({unit_noise(g, rng), unit_noise(g, rng)}, {1.0, 0.6}));
        std::vector<Field> grad = gradient(dm, pot, 0.8);
        Field d = unit_noise(g, rng);
        double eps = 1e-4;
        for (int i = 0; i < dm.rank(); ++i) {
            DensityMatrix plus = dm, minus = dm;
            axpy(eps, d, plus.orbitals[i]);
            axpy(-eps, d, minus.orbitals[i]);
            double fd = (energy(plus, pot, 0.8).total -
                         energy(minus, pot, 0.8).total) /
                        (2 * eps);
            double an = inner_product(grad[i], d);
            CHECK(std::abs(fd - an) / (std::abs(an) + 1e-12) < 1e-5);
        }
    }

    // g(a) is affine in a: g(a1) + g(a2) = 2 g((a1+a2)/2).
    DensityMatrix dm = orthonormalize(
        family({unit_noise(g, rng), unit_noise(g, rng)}, {1.0, 1.0}));
    std::vector<Field> g1 = gradient(dm, pot, 0.4);
    std::vector<Field> g2 = gradient(dm, pot, 1.2);
    std::vector<Field> gm = gradient(dm, pot, 0.8);
    for (int i = 0; i < dm.rank(); ++i) {
        Field lhs = g1[i];
        axpy(1.0, g2[i], lhs);
        axpy(-2.0, gm[i], lhs);
        CHECK(norm_l2(lhs) < 1e-12 * (1.0 + norm_l2(gm[i])));
    }

    // Energy is affine too, decreasing in a.
    EnergyBreakdown e1 = energy(dm, pot, 0.4);
    EnergyBreakdown e2 = energy(dm, pot, 1.2);
    EnergyBreakdown em = energy(dm, pot, 0.8);
    CHECK(std::abs(e1.total + e2.total - 2 * em.total) <
          1e-12 * (1.0 + std::abs(em.total)));
    CHECK(e2.total < e1.total);
}

TEST_CASE("hoffmann-ostenhof inequality") {
    GridPtr g = make_grid(32, 20.0);
    // Rank 1, positive orbital: equality up to roundoff.
    DensityMatrix one = family({gaussian(g, 1.2)}, {1.0});
    double t1 = kinetic_quadratic_form(one.orbitals[0]);
    CHECK(std::abs(hoffmann_ostenhof_check(one)) < 1e-8 * (1.0 + t1));

    // Two nearly disjoint bumps: still nearly tight.
    DensityMatrix two = orthonormalize(family(
        {gaussian(g, 0.8, -4.0, 0.0, 0.0), gaussian(g, 0.8, 4.0, 0.0, 0.0)},
        {1.0, 1.0}));
    double t2 = 0.0;
    for (const Field& u : two.orbitals) t2 += kinetic_quadratic_form(u);
    CHECK(std::abs(hoffmann_ostenhof_check(two)) < 1e-6 * t2);

    // Random families: nonnegative up to discretization slack.
    Rng rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        DensityMatrix dm = orthonormalize(
            family({unit_noise(g, rng), unit_noise(g, rng),
                    unit_noise(g, rng)},
                   {1.0, 1.0, 0.5}));
        double t = 0.0;
        for (int i = 0; i < dm.rank(); ++i)
            t += dm.occupations[i] * kinetic_quadratic_form(dm.orbitals[i]);
        CHECK(hoffmann_ostenhof_check(dm) >= -1e-6 * t);
    }
}

TEST_CASE("guards") {
    GridPtr g = make_grid(16, 10.0);
    GridPtr other = make_grid(24, 10.0);
    PotentialSpec pot = build_coulomb(g, {{0.0, 0.0, 0.0}});
    DensityMatrix dm = family({gaussian(g, 1.0)}, {1.0});
    CHECK_THROWS_AS(energy(dm, pot, -0.1), ConfigError);
    DensityMatrix wrong = family({gaussian(other, 1.0)}, {1.0});
    CHECK_THROWS_AS(energy(wrong, pot, 0.5), DimensionError);
    CHECK_THROWS_AS(mean_field_apply(wrong, pot, 0.5, gaussian(other, 1.0)),
                    DimensionError);

    // Underflowing density contributes zero, not NaN.
    Field tiny = make_field(g);
    for (double& x : tiny.v) x = 1e-310;
    double p = p53_integral(tiny);
    CHECK(std::isfinite(p));
    CHECK(p >= 0.0);
}

}  // TEST_SUITE

#include <doctest.h>

#include <cmath>
#include <vector>

#include "fermicrit/critical.hpp"
#include "fermicrit/errors.hpp"
#include "fermicrit/radial.hpp"
#include "fermicrit/rng.hpp"

#include "helpers.hpp"

using namespace fermicrit;
using namespace fermicrit::testing;

namespace {

double family_ratio(const std::vector<Field>& fam) {
    DensityMatrix dm;
    dm.orbitals = fam;
    dm.occupations.assign(fam.size(), 1.0);
    double t = 0.0;
    for (const Field& f : fam) t += kinetic_quadratic_form(f);
    return t / p53_integral(density(dm));
}

const CriticalEstimate& est1() {
    static CriticalEstimate est = [] {
        SolverConfig cfg;
        return estimate_a_star(1, make_grid(32, 24.0), cfg);
    }();
    return est;
}

}  // namespace

TEST_SUITE("critical") {

TEST_CASE("rank-1 critical coupling matches the radial profile") {
    const CriticalEstimate& est = est1();
    CHECK(est.n == 1);
    CHECK(est.rank_found == 1);
    CHECK(rel_err(est.a_star, 9.578299) < 0.02);
    CHECK(gram_identity_deviation(est.optimizer) < 1e-8);
    // The reported value is exactly the optimizer's ratio.
    CHECK(rel_err(family_ratio(est.optimizer.orbitals), est.a_star) < 1e-10);
}

TEST_CASE("the ratio is scale and rotation invariant") {
    const CriticalEstimate& est = est1();
    double base = family_ratio(est.optimizer.orbitals);
    for (double t : {0.8, 1.25}) {
        std::vector<Field> fam;
        for (const Field& u : est.optimizer.orbitals)
            fam.push_back(dilate(u, t));
        // Exact in the continuum; trilinear resampling costs O(h^2/sigma^2)
        // on this coarse fixture.
        CHECK(std::abs(family_ratio(fam) / base - 1.0) < 0.03);
    }

    GridPtr g = make_grid(16, 12.0);
    Rng rng(3);
    DensityMatrix dm = orthonormalize(
        family({unit_noise(g, rng), unit_noise(g, rng)}, {1.0, 1.0}));
    double before = family_ratio(dm.orbitals);
    double c = std::cos(0.7), s = std::sin(0.7);
    Field r0 = dm.orbitals[0];
    scale(r0, c);
    axpy(s, dm.orbitals[1], r0);
    Field r1 = dm.orbitals[1];
    scale(r1, c);
    axpy(-s, dm.orbitals[0], r1);
    CHECK(std::abs(family_ratio({r0, r1}) / before - 1.0) < 1e-10);
}

TEST_CASE("rank-1 lieb-thirring estimate and duality") {
    SolverConfig cfg;
    LTEstimate lt = estimate_l_star(1, make_grid(32, 24.0), cfg);
    CHECK(lt.n == 1);
    CHECK(lt.l_star > 0.0);
    REQUIRE(lt.eigenvalues.size() == 1);
    CHECK(lt.eigenvalues[0] <= 0.0);
    CHECK(!lt.degenerate);
    double wmin = 1e300, wmax = -1e300;
    for (double v : lt.potential.v) {
        wmin = std::min(wmin, v);
        wmax = std::max(wmax, v);
    }
    CHECK(wmin >= 0.0);
    CHECK(wmax > 0.0);
    CHECK(duality_check(est1(), lt) < 0.05);
}

TEST_CASE("rank-2 coupling is strictly smaller") {
    // Compare both ranks on the same grid so discretization bias cancels.
    SolverConfig cfg;
    GridPtr g = make_grid(30, 24.0);
    CriticalEstimate r1 = estimate_a_star(1, g, cfg);
    CriticalEstimate r2 = estimate_a_star(2, g, cfg);
    CHECK(r2.rank_found == 2);
    CHECK(gram_identity_deviation(r2.optimizer) < 1e-8);
    CHECK(r2.a_star < r1.a_star);
}

TEST_CASE("guards") {
    SolverConfig cfg;
    GridPtr g = make_grid(8, 8.0);
    CHECK_THROWS_AS(estimate_a_star(0, g, cfg), ConfigError);
    CHECK_THROWS_AS(estimate_l_star(0, g, cfg), ConfigError);
    SolverConfig bad;
    bad.grad_tol = -1.0;
    CHECK_THROWS_AS(estimate_a_star(1, g, bad), ConfigError);

    CriticalEstimate a;
    a.n = 1;
    LTEstimate l;
    l.n = 2;
    CHECK_THROWS_AS(duality_check(a, l), ConfigError);
}

}  // TEST_SUITE

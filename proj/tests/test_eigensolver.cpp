#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fermicrit/eigensolver.hpp"
#include "fermicrit/errors.hpp"
#include "fermicrit/potential.hpp"
#include "fermicrit/radial.hpp"
#include "fermicrit/state.hpp"

#include "helpers.hpp"

using namespace fermicrit;
using namespace fermicrit::testing;

namespace {

double eig_residual(const Field& veff, const Field& psi, double mu) {
    Field h = apply_laplacian(psi);
    for (std::size_t i = 0; i < h.v.size(); ++i)
        h.v[i] += veff.v[i] * psi.v[i] - mu * psi.v[i];
    return norm_l2(h);
}

}  // namespace

TEST_SUITE("eigensolver") {

TEST_CASE("hydrogen ground and first excited level") {
    // exp(-r/2) and exp(-r/4) tails: the min-image potential floor at the
    // face midpoints, -1/(box/2), must stay well above the 2s level or the
    // second eigenvector hybridizes with face-localized states; the same
    // far-field distortion dominates the 2s error (it does not shrink with
    // h), so the box drives the 5% check: 7.7% at box 36, 4.1% at 40,
    // ~2% at 44.
    GridPtr g = make_grid(90, 44.0);
    PotentialSpec pot = build_coulomb(g, {{0.0, 0.0, 0.0}});
    Rng rng(11);
    EigenResult res = lowest_eigenpairs(pot.values, 2, 1e-8, 600, rng);
    REQUIRE(res.converged);
    REQUIRE(res.values.size() == 2);
    CHECK(res.values[0] < res.values[1]);
    CHECK(rel_err(res.values[0], -0.25) < 0.05);
    CHECK(rel_err(res.values[1], -0.0625) < 0.05);

    // Vectors are orthonormal and satisfy the eigen equation.
    DensityMatrix dm = family(res.vectors, {1.0, 1.0});
    CHECK(gram_identity_deviation(dm) < 1e-8);
    for (int i = 0; i < 2; ++i)
        CHECK(eig_residual(pot.values, res.vectors[i], res.values[i]) <=
              10 * 1e-8 * std::max(1.0, std::abs(res.values[i])));

    // Deterministic for a fixed seed.
    Rng rng2(11);
    EigenResult res2 = lowest_eigenpairs(pot.values, 2, 1e-8, 600, rng2);
    CHECK(std::abs(res2.values[0] - res.values[0]) < 1e-13);
    CHECK(std::abs(res2.values[1] - res.values[1]) < 1e-13);
}

TEST_CASE("separable well matches the dense 1-D reference") {
    GridPtr g = make_grid(24, 12.0);
    auto w = [](double t) { return 3.0 * std::exp(-0.5 * t * t); };
    Field veff = make_field(g);
    std::vector<double> v1(g->n);
    for (int i = 0; i < g->n; ++i) v1[i] = -w(g->coord(i));
    for (int ix = 0; ix < g->n; ++ix)
        for (int iy = 0; iy < g->n; ++iy)
            for (int iz = 0; iz < g->n; ++iz)
                veff.at(ix, iy, iz) = v1[ix] + v1[iy] + v1[iz];

    std::vector<double> e = radial::spectral_levels_1d(v1, g->box, 2);
    Rng rng(3);
    EigenResult res = lowest_eigenpairs(veff, 2, 1e-9, 800, rng);
    REQUIRE(res.converged);
    // Kronecker-sum spectrum: the 3-D operator separates axis by axis.
    CHECK(rel_err(res.values[0], 3 * e[0]) < 1e-5);
    CHECK(rel_err(res.values[1], 2 * e[0] + e[1]) < 1e-5);
}

TEST_CASE("warm start reuses the previous block") {
    GridPtr g = make_grid(24, 16.0);
    PotentialSpec pot = build_coulomb(g, {{0.0, 0.0, 0.0}});
    Rng rng(5);
    EigenResult cold = lowest_eigenpairs(pot.values, 2, 1e-9, 600, rng);
    REQUIRE(cold.converged);
    Rng rng2(5);
    EigenResult warm =
        lowest_eigenpairs(pot.values, 2, 1e-9, 600, rng2, &cold.vectors);
    REQUIRE(warm.converged);
    CHECK(warm.iterations <= std::max(3, cold.iterations / 2));
    CHECK(std::abs(warm.values[0] - cold.values[0]) < 1e-8);
}

TEST_CASE("guards") {
    GridPtr g = make_grid(8, 4.0);
    Field veff = make_field(g);
    Rng rng(1);
    CHECK_THROWS_AS(lowest_eigenpairs(veff, 0, 1e-8, 100, rng), ConfigError);
    CHECK_THROWS_AS(lowest_eigenpairs(veff, -1, 1e-8, 100, rng), ConfigError);
    CHECK_THROWS_AS(lowest_eigenpairs(veff, 1, 0.0, 100, rng), ConfigError);
    CHECK_THROWS_AS(lowest_eigenpairs(veff, 1, -1e-8, 100, rng), ConfigError);
}

}  // TEST_SUITE

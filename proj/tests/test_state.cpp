#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "fermicrit/errors.hpp"
#include "fermicrit/state.hpp"

#include "helpers.hpp"

using namespace fermicrit;
using namespace fermicrit::testing;

TEST_SUITE("state") {

TEST_CASE("occupation layout") {
    CHECK(occupation_layout(1.0) == std::vector<double>{1.0});
    CHECK(occupation_layout(2.0) == std::vector<double>{1.0, 1.0});
    CHECK(occupation_layout(1.5) == std::vector<double>{1.0, 0.5});
    CHECK(occupation_layout(0.5) == std::vector<double>{0.5});
    CHECK(occupation_layout(3.0) == std::vector<double>{1.0, 1.0, 1.0});
    CHECK_THROWS_AS(occupation_layout(0.0), ConfigError);
    CHECK_THROWS_AS(occupation_layout(-1.0), ConfigError);
}

TEST_CASE("density integrates to the particle number") {
    GridPtr g = make_grid(24, 16.0);
    Field u1 = gaussian(g, 1.0);
    Field u2 = sine_mode(g, 1, 2, 1);
    auto mass = [&](const DensityMatrix& dm) {
        Field rho = density(dm);
        double m = 0.0;
        for (double v : rho.v) {
            CHECK(v >= 0.0);
            m += v;
        }
        return m * g->cell_volume();
    };
    CHECK(mass(family({u1}, {1.0})) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(mass(family({u1, u2}, {1.0, 1.0})) ==
          doctest::Approx(2.0).epsilon(1e-8));
    CHECK(mass(family({u1, u2}, {1.0, 0.5})) ==
          doctest::Approx(1.5).epsilon(1e-8));
    CHECK(family({u1, u2}, {1.0, 0.5}).trace() == doctest::Approx(1.5));
}

TEST_CASE("orthonormalize: idempotent, rank guard, span") {
    GridPtr g = make_grid(24, 16.0);
    Field u1 = gaussian(g, 1.0);
    Field u2 = sine_mode(g, 1, 1, 2);

    DensityMatrix already = family({u1, u2}, {1.0, 1.0});
    DensityMatrix out = orthonormalize(already);
    for (int i = 0; i < 2; ++i) {
        Field d = out.orbitals[i];
        axpy(-1.0, already.orbitals[i], d);
        CHECK(norm_l2(d) < 1e-10);
    }
    CHECK(gram_identity_deviation(out) < 1e-10);

    DensityMatrix dup = family({u1, u1}, {1.0, 1.0});
    CHECK_THROWS_AS(orthonormalize(dup), RankDeficiencyError);
    try {
        orthonormalize(dup);
    } catch (const RankDeficiencyError& e) {
        CHECK(e.gram_eigenvalue < 1e-12);
    }

    // Two Gaussians at overlap 1/2: displacement 2 sigma sqrt(ln 2).
    double d = 2.0 * std::sqrt(std::log(2.0));
    Field ga = gaussian(g, 1.0, -0.5 * d, 0.0, 0.0);
    Field gb = gaussian(g, 1.0, 0.5 * d, 0.0, 0.0);
    CHECK(inner_product(ga, gb) == doctest::Approx(0.5).epsilon(1e-4));
    DensityMatrix pair = orthonormalize(family({ga, gb}, {1.0, 1.0}));
    CHECK(gram_identity_deviation(pair) < 1e-10);
    // The input orbitals stay inside the output span.
    double g0a = inner_product(pair.orbitals[0], ga);
    double g1a = inner_product(pair.orbitals[1], ga);
    Field resid = ga;
    axpy(-g0a, pair.orbitals[0], resid);
    axpy(-g1a, pair.orbitals[1], resid);
    CHECK(norm_l2(resid) < 1e-10);
}

TEST_CASE("operator norm") {
    GridPtr g = make_grid(16, 12.0);
    Field u1 = sine_mode(g, 1, 1, 1);
    Field u2 = sine_mode(g, 2, 1, 1);
    CHECK(operator_norm(family({u1, u2}, {1.0, 1.0})) == doctest::Approx(1.0));
    CHECK(operator_norm(family({u1, u2}, {1.0, 0.5})) == doctest::Approx(1.0));
    CHECK(operator_norm(family({u1, u2}, {0.3, 0.7})) == doctest::Approx(0.7));
    Field skew = u1;
    axpy(0.5, u2, skew);
    CHECK_THROWS_AS(operator_norm(family({u1, skew}, {1.0, 1.0})),
                    ContractViolation);
}

TEST_CASE("rank diagnostic") {
    GridPtr g = make_grid(16, 12.0);
    Field w1 = sine_mode(g, 1, 1, 1);
    Field w2 = sine_mode(g, 1, 2, 1);
    Field w3 = sine_mode(g, 1, 1, 2);
    CHECK(rank_diagnostic({w1, w2, w3}) == 3);
    CHECK(rank_diagnostic({w1, w1, w3}) == 2);
    Field scaled = w2;
    scale(scaled, 0.37);
    CHECK(rank_diagnostic({w1, w2, scaled}) == 2);
    CHECK_THROWS_AS(rank_diagnostic({}), ConfigError);
}

TEST_CASE("density argmax finds the peak node") {
    GridPtr g = make_grid(16, 12.0);
    Field u = gaussian(g, 0.8, g->coord(5), g->coord(9), g->coord(11));
    DensityMatrix dm = family({u}, {1.0});
    std::array<int, 3> peak = density_argmax(density(dm));
    CHECK(peak[0] == 5);
    CHECK(peak[1] == 9);
    CHECK(peak[2] == 11);
}

TEST_CASE("save/load round trip is bitwise") {
    GridPtr g = make_grid(12, 10.0);
    Rng rng(17);
    DensityMatrix dm =
        orthonormalize(family({unit_noise(g, rng), unit_noise(g, rng)},
                              {1.0, 0.25}));
    std::string path = "state_roundtrip.bin";
    save_state(path, dm);
    DensityMatrix back = load_state(path);
    REQUIRE(back.rank() == 2);
    CHECK(back.occupations == dm.occupations);
    CHECK(back.orbitals[0].grid->n == g->n);
    CHECK(back.orbitals[0].grid->box == g->box);
    for (int i = 0; i < 2; ++i) {
        CHECK(std::memcmp(back.orbitals[i].v.data(), dm.orbitals[i].v.data(),
                          dm.orbitals[i].v.size() * sizeof(double)) == 0);
    }

    // Truncated container and non-container both refuse to load.
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    in.close();
    std::ofstream cut("state_truncated.bin", std::ios::binary);
    cut.write(bytes.data(), static_cast<long>(bytes.size() / 2));
    cut.close();
    CHECK_THROWS_AS(load_state("state_truncated.bin"), ConfigError);
    std::ofstream junk("state_junk.bin", std::ios::binary);
    junk << "not a state container";
    junk.close();
    CHECK_THROWS_AS(load_state("state_junk.bin"), ConfigError);
    CHECK_THROWS_AS(load_state("state_missing.bin"), ConfigError);
    std::remove(path.c_str());
    std::remove("state_truncated.bin");
    std::remove("state_junk.bin");
}

}  // TEST_SUITE

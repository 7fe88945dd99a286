#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "fermicrit/grid.hpp"
#include "fermicrit/rng.hpp"
#include "fermicrit/state.hpp"

namespace fermicrit::testing {

// Normalized Gaussian of the given width centered at (cx, cy, cz).
inline Field gaussian(const GridPtr& g, double sigma, double cx = 0.0,
                      double cy = 0.0, double cz = 0.0) {
    Field f = make_field(g);
    for (int ix = 0; ix < g->n; ++ix) {
        double x = g->coord(ix) - cx;
        for (int iy = 0; iy < g->n; ++iy) {
            double y = g->coord(iy) - cy;
            for (int iz = 0; iz < g->n; ++iz) {
                double z = g->coord(iz) - cz;
                f.at(ix, iy, iz) =
                    std::exp(-(x * x + y * y + z * z) / (2 * sigma * sigma));
            }
        }
    }
    scale(f, 1.0 / norm_l2(f));
    return f;
}

// Normalized product of one-axis sine modes; distinct (kx, ky, kz) triples with
// positive entries give exactly orthogonal fields on the uniform grid.
inline Field sine_mode(const GridPtr& g, int kx, int ky, int kz) {
    Field f = make_field(g);
    double w = 2.0 * 3.14159265358979323846 / g->box;
    for (int ix = 0; ix < g->n; ++ix) {
        double x = g->coord(ix);
        for (int iy = 0; iy < g->n; ++iy) {
            double y = g->coord(iy);
            for (int iz = 0; iz < g->n; ++iz) {
                double z = g->coord(iz);
                f.at(ix, iy, iz) = std::sin(w * kx * x) * std::sin(w * ky * y) *
                                   std::sin(w * kz * z);
            }
        }
    }
    scale(f, 1.0 / norm_l2(f));
    return f;
}

inline Field unit_noise(const GridPtr& g, Rng& rng, bool smooth = true) {
    Field f = make_field(g);
    for (double& x : f.v) x = rng.normal();
    if (smooth) f = apply_inv_shifted_laplacian(f, 1.0);
    scale(f, 1.0 / norm_l2(f));
    return f;
}

inline DensityMatrix family(std::vector<Field> orbitals,
                            std::vector<double> occ) {
    DensityMatrix dm;
    dm.orbitals = std::move(orbitals);
    dm.occupations = std::move(occ);
    return dm;
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::abs(want);
}

}  // namespace fermicrit::testing

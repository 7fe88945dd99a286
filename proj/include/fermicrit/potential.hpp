#pragma once

#include <array>
#include <vector>

#include "fermicrit/grid.hpp"

namespace fermicrit {

// Multi-center attractive Coulomb potential V(x) = -sum_k 1/|x - y_k| sampled
// on the grid with the singularity capped at r_reg = spacing/2. Distances use
// the minimum-image (periodic) metric so lattice-shift equivariance is exact.
struct PotentialSpec {
    std::vector<std::array<double, 3>> centers;
    Field values;

    int num_centers() const { return static_cast<int>(centers.size()); }
};

PotentialSpec build_coulomb(const GridPtr& grid,
                            const std::vector<std::array<double, 3>>& centers);

// Hardy-inequality slack eps*K*<-Delta f, f> + (4/eps)*K*<f,f> + <V f, f>.
// Nonnegative in the continuum; small negative values bound the discretization
// error of the regularized potential.
double hardy_bound_check(const PotentialSpec& pot, const Field& f, double eps);

// Minimum-image distance between two points of the periodic box.
double min_image_distance(const Grid& g, const std::array<double, 3>& p,
                          const std::array<double, 3>& q);

// One-axis minimum-image displacement.
double min_image_delta(double d, double box);

}  // namespace fermicrit

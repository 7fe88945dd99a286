#include "fermicrit/potential.hpp"

#include <cmath>
#include <sstream>

#include "fermicrit/errors.hpp"

namespace fermicrit {

double min_image_delta(double d, double box) {
    return d - box * std::round(d / box);
}

double min_image_distance(const Grid& g, const std::array<double, 3>& p,
                          const std::array<double, 3>& q) {
    double s2 = 0.0;
    for (int d = 0; d < 3; ++d) {
        double diff = min_image_delta(p[d] - q[d], g.box);
        s2 += diff * diff;
    }
    return std::sqrt(s2);
}

PotentialSpec build_coulomb(const GridPtr& grid,
                            const std::vector<std::array<double, 3>>& centers) {
    if (centers.empty()) {
        throw ConfigError("build_coulomb: need at least one center");
    }
    double L = grid->box;
    double margin = L / 4.0;
    for (std::size_t k = 0; k < centers.size(); ++k) {
        for (int d = 0; d < 3; ++d) {
            if (!std::isfinite(centers[k][d])) {
                throw ConfigError("build_coulomb: center coordinate not finite");
            }
            // margin >= L/4 from every face of [-L/2, L/2)^3
            if (std::abs(centers[k][d]) > 0.5 * L - margin) {
                std::ostringstream msg;
                msg << "build_coulomb: center " << k + 1
                    << " closer than box_length/4 to the boundary";
                throw ConfigError(msg.str());
            }
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (min_image_distance(*grid, centers[k], centers[j]) < 1e-9) {
                std::ostringstream msg;
                msg << "build_coulomb: centers " << j + 1 << " and " << k + 1
                    << " coincide";
                throw ConfigError(msg.str());
            }
        }
    }

    PotentialSpec pot;
    pot.centers = centers;
    pot.values = make_field(grid);
    double h = grid->spacing();
    double r_reg = 0.5 * h;
    // Node within h/2 of a center: represent that node's cell by the exact
    // average of 1/r over a cube of side h around the singularity,
    // (3 ln(2+sqrt 3) - pi/2) / h. Plain node sampling would either blow up
    // or (with a flat cap) misweight the cell at O(h^2) with a large factor.
    double cell_avg = (3.0 * std::log(2.0 + std::sqrt(3.0)) -
                       0.5 * std::acos(-1.0)) / h;
    int n = grid->n;
    for (int ix = 0; ix < n; ++ix) {
        double x = grid->coord(ix);
        for (int iy = 0; iy < n; ++iy) {
            double y = grid->coord(iy);
            for (int iz = 0; iz < n; ++iz) {
                double z = grid->coord(iz);
                double v = 0.0;
                for (const auto& c : centers) {
                    double r = min_image_distance(*grid, {x, y, z}, c);
                    v -= (r < r_reg) ? cell_avg : 1.0 / r;
                }
                pot.values.at(ix, iy, iz) = v;
            }
        }
    }
    return pot;
}

double hardy_bound_check(const PotentialSpec& pot, const Field& f, double eps) {
    if (!(eps > 0.0)) {
        throw ConfigError("hardy_bound_check: eps must be positive");
    }
    require_same_grid(pot.values, f, "hardy_bound_check");
    double nf2 = inner_product(f, f);
    if (nf2 == 0.0) {
        throw DomainError("hardy_bound_check: zero field");
    }
    double K = pot.num_centers();
    double tf = kinetic_quadratic_form(f);
    double vf = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < f.v.size(); ++i) {
        double term = pot.values.v[i] * f.v[i] * f.v[i];
        double y = term - comp;
        double t = vf + y;
        comp = (t - vf) - y;
        vf = t;
    }
    vf *= f.grid->cell_volume();
    return eps * K * tf + (4.0 / eps) * K * nf2 + vf;
}

}  // namespace fermicrit

#include "fermicrit/eigensolver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "fermicrit/energy.hpp"
#include "fermicrit/errors.hpp"

namespace fermicrit {

namespace {

// Rayleigh-Ritz over span(basis): returns the `take` lowest Ritz pairs as
// fields, with operator images recombined from cached images (no new operator
// applications). Linearly dependent directions are pruned by Gram eigenvalue.
struct RitzOut {
    std::vector<Field> x, ax;
    std::vector<double> values;
};

RitzOut rayleigh_ritz(const std::vector<Field>& basis,
                      const std::vector<Field>& images, int take) {
    int s = static_cast<int>(basis.size());
    Eigen::MatrixXd B(s, s), M(s, s);
    for (int i = 0; i < s; ++i) {
        for (int j = 0; j <= i; ++j) {
            B(i, j) = B(j, i) = inner_product(basis[i], basis[j]);
            double m = 0.5 * (inner_product(basis[i], images[j]) +
                              inner_product(basis[j], images[i]));
            M(i, j) = M(j, i) = m;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gb(B);
    double top = gb.eigenvalues()(s - 1);
    if (!(top > 0.0)) {
        throw NumericalError("rayleigh_ritz: zero basis");
    }
    int kept = 0;
    for (int i = 0; i < s; ++i) {
        if (gb.eigenvalues()(i) > 1e-12 * top) ++kept;
    }
    Eigen::MatrixXd C(s, kept);
    for (int j = 0; j < kept; ++j) {
        int src = s - kept + j;
        C.col(j) = gb.eigenvectors().col(src) /
                   std::sqrt(gb.eigenvalues()(src));
    }
    Eigen::MatrixXd Mt = C.transpose() * M * C;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(Mt);
    int out_n = std::min(take, kept);
    Eigen::MatrixXd Y = C * ritz.eigenvectors().leftCols(out_n);
    RitzOut out;
    out.values.resize(out_n);
    for (int j = 0; j < out_n; ++j) {
        out.values[j] = ritz.eigenvalues()(j);
        Field xj = make_field(basis[0].grid);
        Field axj = make_field(basis[0].grid);
        for (int i = 0; i < s; ++i) {
            axpy(Y(i, j), basis[i], xj);
            axpy(Y(i, j), images[i], axj);
        }
        out.x.push_back(std::move(xj));
        out.ax.push_back(std::move(axj));
    }
    return out;
}

Field smoothed_noise(const GridPtr& g, Rng& rng) {
    Field f = make_field(g);
    for (double& x : f.v) x = rng.normal();
    Field s = apply_inv_shifted_laplacian(f, 1.0);
    double nrm = norm_l2(s);
    scale(s, 1.0 / nrm);
    return s;
}

// Orthonormalize y against the basis (Gram-Schmidt, two passes), then store
// it with a freshly applied image. The image must be computed on the final
// normalized vector: recombining cached images mirrors their roundoff scaled
// by 1/||y_perp||, which compounds across iterations and blows the Ritz
// values up. The drop tolerance discards directions that are numerically
// inside the span. Returns false when dropped.
bool append_direction(const Field& veff, std::vector<Field>& basis,
                      std::vector<Field>& images, Field y) {
    double n0 = norm_l2(y);
    if (!(n0 > 0.0) || !std::isfinite(n0)) return false;
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < basis.size(); ++i) {
            double c = inner_product(basis[i], y);
            axpy(-c, basis[i], y);
        }
    }
    double n1 = norm_l2(y);
    if (n1 < 1e-8 * n0) return false;
    scale(y, 1.0 / n1);
    images.push_back(apply_hamiltonian(veff, y));
    basis.push_back(std::move(y));
    return true;
}

}  // namespace

EigenResult lowest_eigenpairs(const Field& veff, int nev, double tol,
                              int max_iters, Rng& rng,
                              const std::vector<Field>* warm) {
    if (nev < 1 || !(tol > 0.0) || max_iters < 1) {
        throw ConfigError("lowest_eigenpairs: bad parameters");
    }
    const GridPtr& g = veff.grid;
    const int m = nev + 2;

    std::vector<Field> x, ax;
    if (warm) {
        for (const Field& f : *warm) {
            require_same_grid(veff, f, "lowest_eigenpairs");
            if (static_cast<int>(x.size()) < m) append_direction(veff, x, ax, f);
        }
    }
    for (int tries = 0; static_cast<int>(x.size()) < m && tries < 8 * m;
         ++tries) {
        append_direction(veff, x, ax, smoothed_noise(g, rng));
    }
    if (static_cast<int>(x.size()) < m) {
        throw NumericalError("lowest_eigenpairs: could not build a start block");
    }
    RitzOut cur = rayleigh_ritz(x, ax, m);
    std::vector<Field> prev_x;

    EigenResult res;
    for (int iter = 1; iter <= max_iters; ++iter) {
        res.iterations = iter;
        // Residuals of the current Ritz block.
        std::vector<Field> r;
        bool ok = true;
        for (int j = 0; j < static_cast<int>(cur.x.size()); ++j) {
            Field rj = cur.ax[j];
            axpy(-cur.values[j], cur.x[j], rj);
            double rn = norm_l2(rj);
            if (j < nev && rn > tol * std::max(1.0, std::abs(cur.values[j]))) {
                ok = false;
            }
            r.push_back(std::move(rj));
        }
        if (ok) {
            res.converged = true;
            break;
        }
        std::vector<Field> basis = cur.x, images = cur.ax;
        for (int j = 0; j < static_cast<int>(r.size()); ++j) {
            double sigma = std::max(0.1, std::abs(cur.values[j]));
            append_direction(veff, basis, images,
                             apply_inv_shifted_laplacian(r[j], sigma));
        }
        for (std::size_t j = 0; j < prev_x.size(); ++j) {
            append_direction(veff, basis, images, std::move(prev_x[j]));
        }
        prev_x = cur.x;
        cur = rayleigh_ritz(basis, images, m);
        if (static_cast<int>(cur.x.size()) < nev) {
            throw NumericalError("lowest_eigenpairs: basis collapsed");
        }
    }
    int out_n = std::min<int>(nev, static_cast<int>(cur.x.size()));
    res.vectors.assign(cur.x.begin(), cur.x.begin() + out_n);
    res.values.assign(cur.values.begin(), cur.values.begin() + out_n);
    return res;
}

}  // namespace fermicrit

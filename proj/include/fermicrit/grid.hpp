#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

namespace fermicrit {

// Periodic cubic grid. Coordinates along each axis span [-L/2, L/2) with
// spacing L/n; laplacian_multipliers holds |k|^2 for every discrete frequency
// in the half-complex (r2c) layout, zero exactly at the zero frequency.
struct Grid {
    int n = 0;
    double box = 0.0;
    std::vector<double> laplacian_multipliers;  // size n*n*(n/2+1)

    double spacing() const { return box / n; }
    std::size_t points() const {
        return static_cast<std::size_t>(n) * n * n;
    }
    double coord(int i) const { return -0.5 * box + spacing() * i; }
    double cell_volume() const {
        double h = spacing();
        return h * h * h;
    }
    bool same_as(const Grid& other) const {
        return n == other.n && box == other.box;
    }
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(int n_per_axis, double box_length);

// Real scalar field sampled on a Grid, indexed (ix*n + iy)*n + iz.
struct Field {
    GridPtr grid;
    std::vector<double> v;

    std::size_t size() const { return v.size(); }
    double& at(int ix, int iy, int iz) {
        int n = grid->n;
        return v[(static_cast<std::size_t>(ix) * n + iy) * n + iz];
    }
    double at(int ix, int iy, int iz) const {
        int n = grid->n;
        return v[(static_cast<std::size_t>(ix) * n + iy) * n + iz];
    }
};

Field make_field(const GridPtr& g);

// Spectral -Delta f: forward transform, multiply by |k|^2, inverse transform.
Field apply_laplacian(const Field& f);

// (-Delta + shift)^{-1} f, shift > 0. Used as eigensolver preconditioner and
// in smoothing kernels; exact on the grid's Fourier modes.
Field apply_inv_shifted_laplacian(const Field& f, double shift);

// L2 pairing spacing^3 * sum f*g (compensated summation).
double inner_product(const Field& f, const Field& g);
double norm_l2(const Field& f);

// <f, -Delta f> evaluated in Fourier space (Parseval); identical to
// inner_product(f, apply_laplacian(f)) up to roundoff.
double kinetic_quadratic_form(const Field& f);

// g(x) = t^{3/2} f(t x), trilinear interpolation with periodic wrap.
Field dilate(const Field& f, double t);

// Periodic trilinear sample of f at box coordinates (x, y, z).
double sample_trilinear(const Field& f, double x, double y, double z);

// Exact circular shift by whole grid cells.
Field roll(const Field& f, int sx, int sy, int sz);

// In-place helpers (fixed evaluation order, deterministic).
void axpy(double alpha, const Field& x, Field& y);  // y += alpha*x
void scale(Field& f, double alpha);
double kahan_sum(const std::vector<double>& values);

void require_same_grid(const Field& a, const Field& b, const char* where);

}  // namespace fermicrit

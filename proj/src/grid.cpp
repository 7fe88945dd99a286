#include "fermicrit/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <sstream>

#include "fermicrit/errors.hpp"

namespace fermicrit {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool fft_friendly(int n) {
    if (n < 8 || n % 2 != 0) return false;
    int m = n;
    for (int p : {2, 3, 5}) {
        while (m % p == 0) m /= p;
    }
    return m == 1;
}

// One persistent FFTW workspace per grid size. Plans use FFTW_ESTIMATE so
// planning is deterministic; a single mutex serializes transform execution
// (the plans are bound to the shared buffers).
struct FftEngine {
    int n;
    std::size_t nreal, ncplx;
    double* rbuf;
    fftw_complex* cbuf;
    fftw_plan fwd;
    fftw_plan bwd;

    explicit FftEngine(int n_) : n(n_) {
        nreal = static_cast<std::size_t>(n) * n * n;
        ncplx = static_cast<std::size_t>(n) * n * (n / 2 + 1);
        rbuf = fftw_alloc_real(nreal);
        cbuf = fftw_alloc_complex(ncplx);
        fwd = fftw_plan_dft_r2c_3d(n, n, n, rbuf, cbuf, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_3d(n, n, n, cbuf, rbuf, FFTW_ESTIMATE);
    }
};

std::mutex g_fft_mutex;

FftEngine& engine_for(int n) {
    static std::map<int, std::unique_ptr<FftEngine>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, std::make_unique<FftEngine>(n)).first;
    }
    return *it->second;
}

}  // namespace

GridPtr make_grid(int n_per_axis, double box_length) {
    if (!fft_friendly(n_per_axis)) {
        std::ostringstream msg;
        msg << "make_grid: n_per_axis must be even, >= 8, with prime factors "
               "in {2,3,5}; got "
            << n_per_axis;
        throw ConfigError(msg.str());
    }
    if (!(box_length > 0.0) || !std::isfinite(box_length)) {
        throw ConfigError("make_grid: box_length must be positive and finite");
    }
    auto g = std::make_shared<Grid>();
    g->n = n_per_axis;
    g->box = box_length;
    int n = n_per_axis;
    int nzh = n / 2 + 1;
    g->laplacian_multipliers.resize(static_cast<std::size_t>(n) * n * nzh);
    double dk = kTwoPi / box_length;
    for (int ix = 0; ix < n; ++ix) {
        int fx = (ix <= n / 2) ? ix : ix - n;
        double kx = dk * fx;
        for (int iy = 0; iy < n; ++iy) {
            int fy = (iy <= n / 2) ? iy : iy - n;
            double ky = dk * fy;
            for (int iz = 0; iz < nzh; ++iz) {
                double kz = dk * iz;
                g->laplacian_multipliers[(static_cast<std::size_t>(ix) * n + iy) * nzh +
                                         iz] = kx * kx + ky * ky + kz * kz;
            }
        }
    }
    return g;
}

Field make_field(const GridPtr& g) {
    Field f;
    f.grid = g;
    f.v.assign(g->points(), 0.0);
    return f;
}

void require_same_grid(const Field& a, const Field& b, const char* where) {
    if (!a.grid || !b.grid || !a.grid->same_as(*b.grid)) {
        throw DimensionError(std::string(where) + ": fields live on different grids");
    }
}

Field apply_laplacian(const Field& f) {
    const Grid& g = *f.grid;
    std::lock_guard<std::mutex> lock(g_fft_mutex);
    FftEngine& e = engine_for(g.n);
    std::memcpy(e.rbuf, f.v.data(), e.nreal * sizeof(double));
    fftw_execute(e.fwd);
    const double* mult = g.laplacian_multipliers.data();
    for (std::size_t k = 0; k < e.ncplx; ++k) {
        e.cbuf[k][0] *= mult[k];
        e.cbuf[k][1] *= mult[k];
    }
    fftw_execute(e.bwd);
    Field out = make_field(f.grid);
    double inv = 1.0 / static_cast<double>(e.nreal);
    for (std::size_t i = 0; i < e.nreal; ++i) out.v[i] = e.rbuf[i] * inv;
    return out;
}

Field apply_inv_shifted_laplacian(const Field& f, double shift) {
    if (!(shift > 0.0)) {
        throw ConfigError("apply_inv_shifted_laplacian: shift must be > 0");
    }
    const Grid& g = *f.grid;
    std::lock_guard<std::mutex> lock(g_fft_mutex);
    FftEngine& e = engine_for(g.n);
    std::memcpy(e.rbuf, f.v.data(), e.nreal * sizeof(double));
    fftw_execute(e.fwd);
    const double* mult = g.laplacian_multipliers.data();
    for (std::size_t k = 0; k < e.ncplx; ++k) {
        double d = 1.0 / (mult[k] + shift);
        e.cbuf[k][0] *= d;
        e.cbuf[k][1] *= d;
    }
    fftw_execute(e.bwd);
    Field out = make_field(f.grid);
    double inv = 1.0 / static_cast<double>(e.nreal);
    for (std::size_t i = 0; i < e.nreal; ++i) out.v[i] = e.rbuf[i] * inv;
    return out;
}

double kinetic_quadratic_form(const Field& f) {
    const Grid& g = *f.grid;
    std::lock_guard<std::mutex> lock(g_fft_mutex);
    FftEngine& e = engine_for(g.n);
    std::memcpy(e.rbuf, f.v.data(), e.nreal * sizeof(double));
    fftw_execute(e.fwd);
    const double* mult = g.laplacian_multipliers.data();
    int n = g.n;
    int nzh = n / 2 + 1;
    double sum = 0.0, comp = 0.0;
    std::size_t k = 0;
    for (int ix = 0; ix < n; ++ix) {
        for (int iy = 0; iy < n; ++iy) {
            for (int iz = 0; iz < nzh; ++iz, ++k) {
                // r2c stores half the spectrum; interior kz planes count twice
                double w = (iz == 0 || iz == n / 2) ? 1.0 : 2.0;
                double mag = e.cbuf[k][0] * e.cbuf[k][0] + e.cbuf[k][1] * e.cbuf[k][1];
                double term = w * mult[k] * mag;
                double y = term - comp;
                double t = sum + y;
                comp = (t - sum) - y;
                sum = t;
            }
        }
    }
    return sum * g.cell_volume() / static_cast<double>(e.nreal);
}

double inner_product(const Field& f, const Field& g) {
    require_same_grid(f, g, "inner_product");
    double sum = 0.0, comp = 0.0;
    std::size_t m = f.v.size();
    for (std::size_t i = 0; i < m; ++i) {
        double term = f.v[i] * g.v[i];
        double y = term - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum * f.grid->cell_volume();
}

double norm_l2(const Field& f) { return std::sqrt(inner_product(f, f)); }

double kahan_sum(const std::vector<double>& values) {
    // Neumaier variant: survives cancellation of terms larger than the
    // running sum, e.g. {1e16, 1.0, -1e16}.
    double sum = 0.0, comp = 0.0;
    for (double term : values) {
        double t = sum + term;
        if (std::abs(sum) >= std::abs(term)) {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

double sample_trilinear(const Field& f, double x, double y, double z) {
    const Grid& g = *f.grid;
    int n = g.n;
    double h = g.spacing();
    // map to fractional lattice units, wrap into [0, n)
    auto to_lattice = [&](double c) {
        double s = (c + 0.5 * g.box) / h;
        s -= std::floor(s / n) * n;
        if (s >= n) s -= n;
        return s;
    };
    double sx = to_lattice(x), sy = to_lattice(y), sz = to_lattice(z);
    int ix = static_cast<int>(sx), iy = static_cast<int>(sy), iz = static_cast<int>(sz);
    double fx = sx - ix, fy = sy - iy, fz = sz - iz;
    int jx = (ix + 1) % n, jy = (iy + 1) % n, jz = (iz + 1) % n;
    auto val = [&](int a, int b, int c) { return f.at(a, b, c); };
    double c00 = val(ix, iy, iz) * (1 - fx) + val(jx, iy, iz) * fx;
    double c10 = val(ix, jy, iz) * (1 - fx) + val(jx, jy, iz) * fx;
    double c01 = val(ix, iy, jz) * (1 - fx) + val(jx, iy, jz) * fx;
    double c11 = val(ix, jy, jz) * (1 - fx) + val(jx, jy, jz) * fx;
    double c0 = c00 * (1 - fy) + c10 * fy;
    double c1 = c01 * (1 - fy) + c11 * fy;
    return c0 * (1 - fz) + c1 * fz;
}

Field dilate(const Field& f, double t) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw ConfigError("dilate: t must be positive and finite");
    }
    const Grid& g = *f.grid;
    Field out = make_field(f.grid);
    double amp = std::pow(t, 1.5);
    int n = g.n;
    // Concentrating (t > 1) sweeps sample points beyond the box; treat the
    // field as zero there instead of letting the periodic wrap alias t^3
    // copies of the core into the frame.
    double lim = 0.5 * g.box;
    for (int ix = 0; ix < n; ++ix) {
        double x = g.coord(ix) * t;
        for (int iy = 0; iy < n; ++iy) {
            double y = g.coord(iy) * t;
            for (int iz = 0; iz < n; ++iz) {
                double z = g.coord(iz) * t;
                double v = 0.0;
                if (std::abs(x) <= lim && std::abs(y) <= lim &&
                    std::abs(z) <= lim) {
                    v = amp * sample_trilinear(f, x, y, z);
                }
                out.at(ix, iy, iz) = v;
            }
        }
    }
    return out;
}

Field roll(const Field& f, int sx, int sy, int sz) {
    const Grid& g = *f.grid;
    int n = g.n;
    auto wrap = [n](int s) {
        s %= n;
        if (s < 0) s += n;
        return s;
    };
    sx = wrap(sx);
    sy = wrap(sy);
    sz = wrap(sz);
    Field out = make_field(f.grid);
    for (int ix = 0; ix < n; ++ix) {
        int jx = (ix + sx) % n;
        for (int iy = 0; iy < n; ++iy) {
            int jy = (iy + sy) % n;
            for (int iz = 0; iz < n; ++iz) {
                int jz = (iz + sz) % n;
                out.at(jx, jy, jz) = f.at(ix, iy, iz);
            }
        }
    }
    return out;
}

void axpy(double alpha, const Field& x, Field& y) {
    require_same_grid(x, y, "axpy");
    std::size_t m = y.v.size();
    for (std::size_t i = 0; i < m; ++i) y.v[i] += alpha * x.v[i];
}

void scale(Field& f, double alpha) {
    for (double& x : f.v) x *= alpha;
}

}  // namespace fermicrit

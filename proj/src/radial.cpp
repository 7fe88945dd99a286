#include "fermicrit/radial.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "fermicrit/errors.hpp"

namespace fermicrit::radial {

namespace {

// Number of eigenvalues of the symmetric tridiagonal (d, e) strictly below x.
int sturm_count(const std::vector<double>& d, const std::vector<double>& e,
                double x) {
    int count = 0;
    double q = d[0] - x;
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < d.size(); ++i) {
        double denom = q;
        if (std::abs(denom) < 1e-300) denom = -1e-300;
        q = d[i] - x - e[i - 1] * e[i - 1] / denom;
        if (q < 0.0) ++count;
    }
    return count;
}

double bisect_eigenvalue(const std::vector<double>& d,
                         const std::vector<double>& e, int index, double lo,
                         double hi) {
    for (int iter = 0; iter < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo));
         ++iter) {
        double mid = 0.5 * (lo + hi);
        if (sturm_count(d, e, mid) > index) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct ShotResult {
    int sign = 0;  // +1 crossed zero (amplitude too large), -1 blew up, 0 ran out
    std::vector<double> r, w, wp;
};

ShotResult shoot(double s, double rmax, double h) {
    ShotResult out;
    auto rhs = [](double r, double w, double wp, double& dw, double& dwp) {
        dw = wp;
        double nl = std::copysign(std::pow(std::abs(w), 7.0 / 3.0), w);
        dwp = w - nl - (2.0 / r) * wp;
    };
    double r = 1e-6;
    double c2 = (s - std::pow(s, 7.0 / 3.0)) / 6.0;
    double w = s + c2 * r * r;
    double wp = 2.0 * c2 * r;
    out.r.push_back(r);
    out.w.push_back(w);
    out.wp.push_back(wp);
    while (r < rmax) {
        double k1w, k1p, k2w, k2p, k3w, k3p, k4w, k4p;
        rhs(r, w, wp, k1w, k1p);
        rhs(r + h / 2, w + h / 2 * k1w, wp + h / 2 * k1p, k2w, k2p);
        rhs(r + h / 2, w + h / 2 * k2w, wp + h / 2 * k2p, k3w, k3p);
        rhs(r + h, w + h * k3w, wp + h * k3p, k4w, k4p);
        w += h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
        wp += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
        r += h;
        out.r.push_back(r);
        out.w.push_back(w);
        out.wp.push_back(wp);
        if (w < 0.0) {
            out.sign = +1;
            return out;
        }
        if (w > 1.5 * s) {
            out.sign = -1;
            return out;
        }
    }
    return out;
}

double trapz(const std::vector<double>& x, const std::vector<double>& y,
             std::size_t count) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i + 1 < count; ++i) {
        acc += 0.5L * (static_cast<long double>(y[i]) + y[i + 1]) *
               (static_cast<long double>(x[i + 1]) - x[i]);
    }
    return static_cast<double>(acc);
}

}  // namespace

std::vector<double> hydrogen_levels(int ell, int count, double rmax, int n) {
    if (ell < 0 || count < 1 || !(rmax > 0.0) || n < count + 2) {
        throw ConfigError("hydrogen_levels: bad channel or discretization");
    }
    double h = rmax / (n + 1);
    std::vector<double> d(n), e(n - 1, -1.0 / (h * h));
    for (int i = 0; i < n; ++i) {
        double r = h * (i + 1);
        d[i] = 2.0 / (h * h) - 1.0 / r + ell * (ell + 1.0) / (r * r);
    }
    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();
    for (int i = 0; i < n; ++i) {
        double radius = (i > 0 ? std::abs(e[i - 1]) : 0.0) +
                        (i + 1 < n ? std::abs(e[i]) : 0.0);
        lo = std::min(lo, d[i] - radius);
        hi = std::max(hi, d[i] + radius);
    }
    std::vector<double> vals(count);
    for (int k = 0; k < count; ++k) {
        vals[k] = bisect_eigenvalue(d, e, k, lo, hi);
    }
    return vals;
}

CriticalProfile critical_profile(double rmax, double step, int bisections) {
    if (!(rmax > 1.0) || !(step > 0.0) || bisections < 10) {
        throw ConfigError("critical_profile: bad shooting parameters");
    }
    double lo = 1.0, hi = 6.0;
    while (shoot(hi, rmax, step).sign != +1) {
        hi *= 1.5;
        if (hi > 1e6) {
            throw NumericalError("critical_profile: no overshoot bracket found");
        }
    }
    for (int i = 0; i < bisections; ++i) {
        double mid = 0.5 * (lo + hi);
        if (shoot(mid, rmax, step).sign == +1) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    double s_star = 0.5 * (lo + hi);
    ShotResult traj = shoot(s_star, rmax, step);

    // The shooting tail past the last positive sample is garbage; cut there.
    std::size_t cut = 0;
    for (std::size_t i = 0; i < traj.w.size(); ++i) {
        if (traj.w[i] > 0.0) cut = i;
    }
    const std::size_t m = cut;  // integrate over indices [0, m)
    if (m < 1000) {
        throw NumericalError("critical_profile: trajectory collapsed");
    }
    std::vector<double> f(m);
    const auto& r = traj.r;
    const auto& w = traj.w;
    const auto& wp = traj.wp;
    auto integral = [&](auto weight) {
        for (std::size_t i = 0; i < m; ++i) f[i] = weight(i);
        return 4.0 * M_PI * trapz(r, f, m);
    };
    CriticalProfile p;
    p.amplitude = s_star;
    p.mass = integral([&](std::size_t i) { return w[i] * w[i] * r[i] * r[i]; });
    p.kinetic =
        integral([&](std::size_t i) { return wp[i] * wp[i] * r[i] * r[i]; });
    p.p53 = integral([&](std::size_t i) {
        return std::pow(std::abs(w[i]), 10.0 / 3.0) * r[i] * r[i];
    });
    p.coulomb = integral([&](std::size_t i) { return w[i] * w[i] * r[i]; });
    double second =
        integral([&](std::size_t i) { return w[i] * w[i] * r[i] * r[i] * r[i] * r[i]; });
    p.rms_radius = std::sqrt(second / p.mass);
    p.a_star = p.kinetic * std::pow(p.mass, 2.0 / 3.0) / p.p53;
    p.r.assign(r.begin(), r.begin() + m);
    p.w.assign(w.begin(), w.begin() + m);
    return p;
}

namespace {

GaussianEnergy integrate_gaussian(double width) {
    // Composite Simpson on [0, 14 w], fine enough that the quadrature error
    // is far below the comparison tolerances.
    const int m = 20000;  // even
    const double rmax = 14.0 * width;
    const double h = rmax / m;
    const double norm = std::pow(M_PI * width * width, -0.75);
    auto u = [&](double r) { return norm * std::exp(-r * r / (2 * width * width)); };
    auto up = [&](double r) { return -r / (width * width) * u(r); };
    long double kin = 0.0L, ext = 0.0L, nl = 0.0L;
    for (int i = 0; i <= m; ++i) {
        double r = i * h;
        double wgt = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        double uu = u(r);
        kin += wgt * up(r) * up(r) * r * r;
        ext += wgt * uu * uu * r;  // 1/r weight folded in
        nl += wgt * std::pow(uu * uu, 5.0 / 3.0) * r * r;
    }
    double c = 4.0 * M_PI * h / 3.0;
    GaussianEnergy e;
    e.kinetic = c * static_cast<double>(kin);
    e.external = -c * static_cast<double>(ext);
    e.nonlinear = c * static_cast<double>(nl);
    return e;
}

}  // namespace

GaussianEnergy gaussian_energy_reference(double width) {
    if (!(width > 0.0)) {
        throw ConfigError("gaussian_energy_reference: width must be positive");
    }
    return integrate_gaussian(width);
}

double duality_constant() { return 0.6 * std::pow(0.4, 2.0 / 3.0); }

double l_star_rank1(double a_star) {
    if (!(a_star > 0.0)) {
        throw ConfigError("l_star_rank1: coupling must be positive");
    }
    return std::pow(duality_constant() / a_star, 1.5);
}

std::vector<double> spectral_levels_1d(const std::vector<double>& v, double box,
                                       int count) {
    int n = static_cast<int>(v.size());
    if (n < 4 || n % 2 != 0 || !(box > 0.0) || count < 1 || count > n) {
        throw ConfigError("spectral_levels_1d: bad dimensions");
    }
    double dk = 2.0 * M_PI / box;
    std::vector<double> mult(n);
    for (int k = 0; k < n; ++k) {
        double f = (k <= n / 2) ? k : k - n;
        mult[k] = dk * dk * f * f;
    }
    // Circulant kernel of the Fourier-multiplier Laplacian.
    std::vector<double> kernel(n, 0.0);
    for (int dpos = 0; dpos < n; ++dpos) {
        long double acc = 0.0L;
        for (int k = 0; k < n; ++k) {
            acc += mult[k] * std::cos(2.0 * M_PI * k * dpos / n);
        }
        kernel[dpos] = static_cast<double>(acc / n);
    }
    Eigen::MatrixXd H(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            H(i, j) = kernel[(i - j + n) % n];
        }
        H(i, i) += v[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) out[i] = es.eigenvalues()(i);
    return out;
}

}  // namespace fermicrit::radial

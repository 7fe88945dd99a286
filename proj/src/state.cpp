#include "fermicrit/state.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "fermicrit/errors.hpp"

namespace fermicrit {

namespace {

constexpr char kMagic[4] = {'F', 'M', 'C', 'R'};
constexpr std::uint32_t kVersion = 1;

Eigen::MatrixXd gram_eigen(const DensityMatrix& gamma) {
    int R = gamma.rank();
    Eigen::MatrixXd G(R, R);
    for (int i = 0; i < R; ++i) {
        for (int j = 0; j <= i; ++j) {
            double g = inner_product(gamma.orbitals[i], gamma.orbitals[j]);
            G(i, j) = g;
            G(j, i) = g;
        }
    }
    return G;
}

void check_shape(const DensityMatrix& gamma, const char* where) {
    if (gamma.orbitals.empty()) {
        throw ConfigError(std::string(where) + ": empty orbital list");
    }
    if (gamma.occupations.size() != gamma.orbitals.size()) {
        throw ConfigError(std::string(where) +
                          ": occupation count does not match orbital count");
    }
    for (std::size_t i = 1; i < gamma.orbitals.size(); ++i) {
        require_same_grid(gamma.orbitals[0], gamma.orbitals[i], where);
    }
    for (double n : gamma.occupations) {
        if (!(n >= 0.0 && n <= 1.0)) {
            throw ConfigError(std::string(where) +
                              ": occupations must lie in [0,1]");
        }
    }
}

}  // namespace

double DensityMatrix::trace() const {
    double s = 0.0;
    for (double n : occupations) s += n;
    return s;
}

std::vector<double> occupation_layout(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw ConfigError("occupation_layout: particle number must be positive");
    }
    int nprime = static_cast<int>(std::ceil(lambda - 1e-12));
    std::vector<double> occ(nprime, 1.0);
    occ[nprime - 1] = lambda - (nprime - 1);
    return occ;
}

Field density(const DensityMatrix& gamma) {
    check_shape(gamma, "density");
    Field rho = make_field(gamma.orbitals[0].grid);
    std::size_t m = rho.v.size();
    for (int i = 0; i < gamma.rank(); ++i) {
        double n = gamma.occupations[i];
        const double* u = gamma.orbitals[i].v.data();
        for (std::size_t p = 0; p < m; ++p) rho.v[p] += n * u[p] * u[p];
    }
    return rho;
}

std::vector<double> gram_matrix(const DensityMatrix& gamma) {
    check_shape(gamma, "gram_matrix");
    Eigen::MatrixXd G = gram_eigen(gamma);
    int R = gamma.rank();
    std::vector<double> out(static_cast<std::size_t>(R) * R);
    for (int i = 0; i < R; ++i)
        for (int j = 0; j < R; ++j) out[static_cast<std::size_t>(i) * R + j] = G(i, j);
    return out;
}

double gram_identity_deviation(const DensityMatrix& gamma) {
    Eigen::MatrixXd G = gram_eigen(gamma);
    int R = gamma.rank();
    double dev = 0.0;
    for (int i = 0; i < R; ++i)
        for (int j = 0; j < R; ++j)
            dev = std::max(dev, std::abs(G(i, j) - (i == j ? 1.0 : 0.0)));
    return dev;
}

DensityMatrix orthonormalize(const DensityMatrix& gamma) {
    check_shape(gamma, "orthonormalize");
    int R = gamma.rank();
    Eigen::MatrixXd G = gram_eigen(gamma);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    const Eigen::VectorXd& ev = es.eigenvalues();
    if (ev(0) <= 1e-12) {
        std::ostringstream msg;
        msg << "orthonormalize: Gram matrix near-singular, eigenvalue " << ev(0);
        throw RankDeficiencyError(msg.str(), ev(0));
    }
    Eigen::MatrixXd inv_sqrt = es.eigenvectors() *
                               ev.array().rsqrt().matrix().asDiagonal() *
                               es.eigenvectors().transpose();
    DensityMatrix out;
    out.occupations = gamma.occupations;
    out.orbitals.reserve(R);
    for (int i = 0; i < R; ++i) {
        Field ui = make_field(gamma.orbitals[0].grid);
        for (int j = 0; j < R; ++j) {
            axpy(inv_sqrt(j, i), gamma.orbitals[j], ui);
        }
        out.orbitals.push_back(std::move(ui));
    }
    return out;
}

double operator_norm(const DensityMatrix& gamma) {
    check_shape(gamma, "operator_norm");
    if (gram_identity_deviation(gamma) > 1e-8) {
        throw ContractViolation(
            "operator_norm: input must be orthonormalized (Gram deviates from "
            "identity by more than 1e-8)");
    }
    double m = 0.0;
    for (double n : gamma.occupations) m = std::max(m, n);
    return m;
}

int rank_diagnostic(const std::vector<Field>& orbitals, double tol) {
    if (orbitals.empty()) {
        throw ConfigError("rank_diagnostic: empty orbital list");
    }
    int R = static_cast<int>(orbitals.size());
    Eigen::MatrixXd G(R, R);
    for (int i = 0; i < R; ++i)
        for (int j = 0; j <= i; ++j) {
            double g = inner_product(orbitals[i], orbitals[j]);
            G(i, j) = g;
            G(j, i) = g;
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    double top = es.eigenvalues()(R - 1);
    if (top <= 0.0) return 0;
    int count = 0;
    for (int i = 0; i < R; ++i) {
        if (es.eigenvalues()(i) > tol * top) ++count;
    }
    return count;
}

std::array<int, 3> density_argmax(const Field& rho) {
    const GridPtr& g = rho.grid;
    std::array<int, 3> best{0, 0, 0};
    double mx = rho.v.at(0);
    for (int ix = 0; ix < g->n; ++ix)
        for (int iy = 0; iy < g->n; ++iy)
            for (int iz = 0; iz < g->n; ++iz) {
                double x = rho.at(ix, iy, iz);
                if (x > mx) {
                    mx = x;
                    best = {ix, iy, iz};
                }
            }
    return best;
}

void save_state(const std::string& path, const DensityMatrix& gamma) {
    check_shape(gamma, "save_state");
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) {
        throw ConfigError("save_state: cannot open " + path + " for writing");
    }
    std::uint32_t n = static_cast<std::uint32_t>(gamma.orbitals[0].grid->n);
    std::uint32_t rank = static_cast<std::uint32_t>(gamma.rank());
    double box = gamma.orbitals[0].grid->box;
    bool ok = std::fwrite(kMagic, 1, 4, fp) == 4 &&
              std::fwrite(&kVersion, sizeof kVersion, 1, fp) == 1 &&
              std::fwrite(&n, sizeof n, 1, fp) == 1 &&
              std::fwrite(&box, sizeof box, 1, fp) == 1 &&
              std::fwrite(&rank, sizeof rank, 1, fp) == 1 &&
              std::fwrite(gamma.occupations.data(), sizeof(double), rank, fp) == rank;
    for (const Field& u : gamma.orbitals) {
        ok = ok && std::fwrite(u.v.data(), sizeof(double), u.v.size(), fp) ==
                       u.v.size();
    }
    std::fclose(fp);
    if (!ok) {
        throw ConfigError("save_state: short write to " + path);
    }
}

DensityMatrix load_state(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) {
        throw ConfigError("load_state: cannot open " + path);
    }
    char magic[4];
    std::uint32_t version = 0, n = 0, rank = 0;
    double box = 0.0;
    bool ok = std::fread(magic, 1, 4, fp) == 4 &&
              std::memcmp(magic, kMagic, 4) == 0 &&
              std::fread(&version, sizeof version, 1, fp) == 1 && version == kVersion &&
              std::fread(&n, sizeof n, 1, fp) == 1 &&
              std::fread(&box, sizeof box, 1, fp) == 1 &&
              std::fread(&rank, sizeof rank, 1, fp) == 1 && rank >= 1 && rank < 64;
    if (!ok) {
        std::fclose(fp);
        throw ConfigError("load_state: " + path + " is not a state container");
    }
    DensityMatrix gamma;
    gamma.occupations.resize(rank);
    ok = std::fread(gamma.occupations.data(), sizeof(double), rank, fp) == rank;
    GridPtr grid = make_grid(static_cast<int>(n), box);
    for (std::uint32_t i = 0; ok && i < rank; ++i) {
        Field u = make_field(grid);
        ok = std::fread(u.v.data(), sizeof(double), u.v.size(), fp) == u.v.size();
        gamma.orbitals.push_back(std::move(u));
    }
    std::fclose(fp);
    if (!ok) {
        throw ConfigError("load_state: truncated container " + path);
    }
    return gamma;
}

}  // namespace fermicrit

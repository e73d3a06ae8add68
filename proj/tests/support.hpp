#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "spod/solvers.hpp"

namespace spod::testing {

// Seeded source for property tests.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double a = 0.0, double b = 1.0) { return std::uniform_real_distribution<double>(a, b)(engine_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
    long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(engine_); }

    Matrix matrix(Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
        return m;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

// l_j(f) = prod_{m != j} (f - x_m) / (x_j - x_m) on nodes -2..3.
inline double lagrange_product(double f, int j) {
    double num = 1.0, den = 1.0;
    for (int m = 0; m < 6; ++m) {
        if (m == j) continue;
        num *= f - (m - 2);
        den *= static_cast<double>(j - m);
    }
    return num / den;
}

struct EigSvd {
    Matrix u;
    Vector sigma;
    Matrix v;
};

// Thin SVD through the eigendecomposition of x^T x (or x x^T when wide).
// Only used on small well-conditioned inputs.
inline EigSvd eig_svd(const Matrix& x) {
    const bool wide = x.cols() > x.rows();
    const Matrix a = wide ? Matrix(x.transpose()) : x;
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.transpose() * a);
    const Eigen::Index p = a.cols();
    EigSvd out;
    out.sigma.resize(p);
    out.v.resize(p, p);
    out.u.resize(a.rows(), p);
    for (Eigen::Index i = 0; i < p; ++i) {
        // eigenvalues come out ascending
        const Eigen::Index src = p - 1 - i;
        out.sigma(i) = std::sqrt(std::max(es.eigenvalues()(src), 0.0));
        out.v.col(i) = es.eigenvectors().col(src);
        out.u.col(i) = out.sigma(i) > 0.0 ? Vector(a * out.v.col(i) / out.sigma(i)) : Vector::Zero(a.rows());
    }
    if (wide) std::swap(out.u, out.v);
    return out;
}

inline Matrix svt_oracle(const Matrix& x, double tau) {
    const EigSvd s = eig_svd(x);
    Vector shrunk = (s.sigma.array() - tau).max(0.0).matrix();
    return s.u * shrunk.asDiagonal() * s.v.transpose();
}

inline double nuclear_oracle(const Matrix& x) { return eig_svd(x).sigma.sum(); }

inline double naive_l1(const Matrix& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) s += std::abs(x(i, j));
    return s;
}

// Term-by-term residual, one column shift at a time.
inline Matrix naive_residual(const SpodProblem& p, const std::vector<Matrix>& frames, const Matrix& noise) {
    Matrix r = p.snapshot.values;
    for (std::size_t k = 0; k < frames.size(); ++k) {
        const auto shifts = p.transports[k].shifts();
        for (Eigen::Index n = 0; n < r.cols(); ++n)
            r.col(n) -= apply_shift(frames[k].col(n), shifts[static_cast<std::size_t>(n)], p.snapshot.grid);
    }
    if (noise.size() > 0) r -= noise;
    return r;
}

inline double naive_data_term(const SpodProblem& p, const std::vector<Matrix>& frames, const Matrix& noise) {
    const Matrix r = naive_residual(p, frames, noise);
    double s = 0.0;
    for (Eigen::Index i = 0; i < r.rows(); ++i)
        for (Eigen::Index j = 0; j < r.cols(); ++j) s += r(i, j) * r(i, j);
    return 0.5 * s;
}

// Random problem on [0, 1) with M points. Shifts are whole lattice steps
// when `lattice` is set and arbitrary reals otherwise.
inline SpodProblem random_problem(Rng& rng, Eigen::Index m, Eigen::Index n, std::size_t k, bool lattice,
                                  bool noise_enabled = true) {
    const SpatialGrid grid = SpatialGrid::uniform(m, 0.0, 1.0);
    std::vector<double> times(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) times[static_cast<std::size_t>(j)] = static_cast<double>(j);
    SpodProblem p;
    p.snapshot = SnapshotMatrix{rng.matrix(m, n), grid, times};
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<double> s(static_cast<std::size_t>(n));
        for (auto& v : s)
            v = lattice ? static_cast<double>(rng.integer(-2 * m, 2 * m)) * grid.dx : rng.uniform(-1.5, 1.5);
        p.transports.emplace_back(std::move(s), grid);
    }
    p.noise_enabled = noise_enabled;
    return p;
}

}  // namespace spod::testing

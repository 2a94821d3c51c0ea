#ifndef COVCUSUM_DIST_HPP
#define COVCUSUM_DIST_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "covcusum/common.hpp"
#include "covcusum/cusum.hpp"

namespace covcusum {

/** Kolmogorov distribution function K(z) = 1 - 2 sum_{i>=1} (-1)^{i-1}
 *  exp(-2 i^2 z^2); the dual theta series is used for small z where the
 *  alternating form cancels catastrophically. */
inline double kolmogorov_cdf(double z) {
    if (z <= 0.0) return 0.0;
    if (z < 1.0) {
        const double pi = 3.14159265358979323846;
        double s = 0.0;
        for (int i = 1; i < 200; ++i) {
            double term = std::exp(-(2.0 * i - 1.0) * (2.0 * i - 1.0) * pi * pi / (8.0 * z * z));
            s += term;
            if (term < 1e-16) break;
        }
        return std::clamp(std::sqrt(2.0 * pi) / z * s, 0.0, 1.0);
    }
    double s = 0.0;
    double sign = 1.0;
    for (int i = 1; i < 200; ++i) {
        double term = std::exp(-2.0 * static_cast<double>(i) * static_cast<double>(i) * z * z);
        s += sign * term;
        sign = -sign;
        if (term < 1e-16) break;
    }
    return std::clamp(1.0 - 2.0 * s, 0.0, 1.0);
}

inline double kolmogorov_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("kolmogorov_quantile: p outside (0,1)");
    double lo = 0.01, hi = 5.0;
    while (hi - lo > 1e-8) {
        double mid = 0.5 * (lo + hi);
        (kolmogorov_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/** Sorted Monte Carlo sample of sup_{1<=k<grid_n} |B0(k/grid_n)| / g(k/grid_n)
 *  with lookup by lower empirical quantile (index ceil(p * reps)). */
struct QuantileTable {
    WeightFunction g;
    Eigen::Index grid_n = 0;
    Eigen::Index reps = 0;
    std::uint64_t seed = 0;
    std::vector<double> sorted_sample;

    double quantile(double p) const {
        if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("QuantileTable: p outside (0,1)");
        if (sorted_sample.empty()) throw std::invalid_argument("QuantileTable: empty table");
        auto idx = static_cast<std::size_t>(
            std::ceil(p * static_cast<double>(sorted_sample.size()) - 1e-9));
        idx = std::min(std::max<std::size_t>(idx, 1), sorted_sample.size());
        return sorted_sample[idx - 1];
    }

    double mean() const {
        if (sorted_sample.empty()) throw std::invalid_argument("QuantileTable: empty table");
        double s = 0.0;
        for (double x : sorted_sample) s += x;
        return s / static_cast<double>(sorted_sample.size());
    }
};

namespace detail {

/** One bridge-sup replicate: grid_n gaussian increments of variance 1/grid_n,
 *  bridged at the endpoint, weighted sup over interior grid points. */
inline double bridge_sup_replicate(const WeightFunction& g, Eigen::Index grid_n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(grid_n));
    std::vector<double> cum(static_cast<std::size_t>(grid_n));
    double run = 0.0;
    for (Eigen::Index k = 0; k < grid_n; ++k) {
        run += normal(rng) * scale;
        cum[static_cast<std::size_t>(k)] = run;
    }
    const double b1 = run;
    double sup = 0.0;
    for (Eigen::Index k = 1; k < grid_n; ++k) {
        double t = static_cast<double>(k) / static_cast<double>(grid_n);
        double v = std::abs(cum[static_cast<std::size_t>(k - 1)] - t * b1) / g(t);
        sup = std::max(sup, v);
    }
    return sup;
}

}  // namespace detail

inline QuantileTable bridge_sup_table(const WeightFunction& g, Eigen::Index grid_n, Eigen::Index reps,
                                      std::uint64_t seed) {
    if (grid_n < 100) throw std::invalid_argument("bridge_sup_table: grid_n < 100");
    if (reps < 1000) throw std::invalid_argument("bridge_sup_table: reps < 1000");
    QuantileTable table{g, grid_n, reps, seed, {}};
    table.sorted_sample.resize(static_cast<std::size_t>(reps));
    for (Eigen::Index r = 0; r < reps; ++r) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r));
        table.sorted_sample[static_cast<std::size_t>(r)] = detail::bridge_sup_replicate(g, grid_n, rng);
    }
    std::sort(table.sorted_sample.begin(), table.sorted_sample.end());
    return table;
}

inline double bridge_sup_quantile(const WeightFunction& g, Eigen::Index grid_n, Eigen::Index reps, double p,
                                  std::uint64_t seed) {
    return bridge_sup_table(g, grid_n, reps, seed).quantile(p);
}

/** MC estimate of E sup |B0(t)| / g(t) on the same discretization. */
inline double mu_star(const WeightFunction& g, Eigen::Index grid_n, Eigen::Index reps, std::uint64_t seed) {
    if (grid_n < 100) throw std::invalid_argument("mu_star: grid_n < 100");
    if (reps < 1000) throw std::invalid_argument("mu_star: reps < 1000");
    double s = 0.0;
    for (Eigen::Index r = 0; r < reps; ++r) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r));
        s += detail::bridge_sup_replicate(g, grid_n, rng);
    }
    return s / static_cast<double>(reps);
}

/** Symmetric PSD square root; eigenvalues in [-1e-8, 0) are clamped to zero,
 *  anything lower is rejected. */
inline Matrix psd_sqrt(const Matrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("psd_sqrt: non-square input");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("psd_sqrt: input not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.transpose()) / 2.0);
    Vector lam = es.eigenvalues();
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam[i] < -1e-8)
            throw std::runtime_error("psd_sqrt: matrix has eigenvalue below -1e-8, not positive semidefinite");
        lam[i] = std::sqrt(std::max(0.0, lam[i]));
    }
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

/** Pre-drawn standard-normal increments for the correlated-bridge null
 *  simulation: replicate r uses rng(seed + r), grid-major then coordinate
 *  within each grid step. Shared across calls so a study can recombine the
 *  same noise under many sigma_T matrices. */
struct BridgeNoise {
    Eigen::Index grid_n = 0;
    Eigen::Index L = 0;
    std::uint64_t seed = 0;
    std::vector<Matrix> z;  // one grid_n x L matrix per replicate

    static BridgeNoise draw(Eigen::Index grid_n, Eigen::Index L, Eigen::Index reps, std::uint64_t seed) {
        if (grid_n < 100) throw std::invalid_argument("BridgeNoise: grid_n < 100");
        if (L < 1 || reps < 1) throw std::invalid_argument("BridgeNoise: need L, reps >= 1");
        BridgeNoise noise{grid_n, L, seed, {}};
        noise.z.resize(static_cast<std::size_t>(reps));
        for (Eigen::Index r = 0; r < reps; ++r) {
            std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r));
            std::normal_distribution<double> normal(0.0, 1.0);
            Matrix& m = noise.z[static_cast<std::size_t>(r)];
            m.resize(grid_n, L);
            for (Eigen::Index k = 0; k < grid_n; ++k)
                for (Eigen::Index j = 0; j < L; ++j) m(k, j) = normal(rng);
        }
        return noise;
    }

    Eigen::Index reps() const { return static_cast<Eigen::Index>(z.size()); }
};

namespace detail {

/** Sups of L correlated weighted bridges built from one increment block:
 *  increments z A^T / sqrt(grid_n), cumulated and bridged per coordinate. */
inline Vector correlated_bridge_sups(const Matrix& z, const Matrix& A, const WeightFunction& g) {
    const Eigen::Index grid_n = z.rows();
    const Eigen::Index L = A.rows();
    Matrix w = z * A.transpose() / std::sqrt(static_cast<double>(grid_n));
    Vector run = Vector::Zero(L);
    Matrix cum(grid_n, L);
    for (Eigen::Index k = 0; k < grid_n; ++k) {
        run += w.row(k).transpose();
        cum.row(k) = run.transpose();
    }
    Vector sups = Vector::Zero(L);
    for (Eigen::Index k = 1; k < grid_n; ++k) {
        double t = static_cast<double>(k) / static_cast<double>(grid_n);
        double gt = g(t);
        for (Eigen::Index j = 0; j < L; ++j)
            sups[j] = std::max(sups[j], std::abs(cum(k - 1, j) - t * cum(grid_n - 1, j)) / gt);
    }
    return sups;
}

inline void validate_sigma_T(const Matrix& sigma_T) {
    if (sigma_T.rows() != sigma_T.cols()) throw std::invalid_argument("sigma_T must be square");
    if ((sigma_T - sigma_T.transpose()).cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("sigma_T must be symmetric");
    if ((sigma_T.diagonal() - Vector::Ones(sigma_T.rows())).cwiseAbs().maxCoeff() > 1e-6)
        throw std::invalid_argument("sigma_T must have unit diagonal");
}

/** Null Q sample for a given sigma_T from shared noise and a fixed centering
 *  mu; returns the lower empirical p-quantile. */
inline double qn_null_quantile_core(const Matrix& sigma_T, const BridgeNoise& noise, const WeightFunction& g,
                                    double p, double mu) {
    validate_sigma_T(sigma_T);
    if (sigma_T.rows() != noise.L) throw std::invalid_argument("qn_null_quantile: noise dimension mismatch");
    const Matrix A = psd_sqrt(sigma_T);
    const Matrix P = pseudo_inverse(sigma_T);
    const Eigen::Index reps = noise.reps();
    std::vector<double> q(static_cast<std::size_t>(reps));
    for (Eigen::Index r = 0; r < reps; ++r) {
        Vector s = correlated_bridge_sups(noise.z[static_cast<std::size_t>(r)], A, g);
        Vector c = s.array() - mu;
        q[static_cast<std::size_t>(r)] = std::max(0.0, c.dot(P * c));
    }
    std::sort(q.begin(), q.end());
    auto idx = static_cast<std::size_t>(std::ceil(p * static_cast<double>(reps) - 1e-9));
    idx = std::min(std::max<std::size_t>(idx, 1), q.size());
    return q[idx - 1];
}

}  // namespace detail

/** Null quantile of Q_n conditional on sigma_T: L correlated bridge paths per
 *  replicate, coordinate sups centered at the MC mu* and folded through the
 *  pseudo-inverse quadratic form. Streams noise with the same per-replicate
 *  seeding as BridgeNoise::draw, so shared-noise and one-shot paths agree
 *  bit for bit. */
inline double qn_null_quantile(const Matrix& sigma_T, const WeightFunction& g, Eigen::Index grid_n,
                               Eigen::Index reps, double p, std::uint64_t seed) {
    detail::validate_sigma_T(sigma_T);
    if (grid_n < 100) throw std::invalid_argument("qn_null_quantile: grid_n < 100");
    if (reps < 1000) throw std::invalid_argument("qn_null_quantile: reps < 1000");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("qn_null_quantile: p outside (0,1)");
    const Eigen::Index L = sigma_T.rows();
    const Matrix A = psd_sqrt(sigma_T);
    const Matrix P = pseudo_inverse(sigma_T);
    const double mu = mu_star(g, grid_n, reps, derive_seed(seed, {0x6d75737461720ULL}));
    std::vector<double> q(static_cast<std::size_t>(reps));
    Matrix z(grid_n, L);
    for (Eigen::Index r = 0; r < reps; ++r) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r));
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Eigen::Index k = 0; k < grid_n; ++k)
            for (Eigen::Index j = 0; j < L; ++j) z(k, j) = normal(rng);
        Vector s = detail::correlated_bridge_sups(z, A, g);
        Vector c = s.array() - mu;
        q[static_cast<std::size_t>(r)] = std::max(0.0, c.dot(P * c));
    }
    std::sort(q.begin(), q.end());
    auto idx = static_cast<std::size_t>(std::ceil(p * static_cast<double>(reps) - 1e-9));
    idx = std::min(std::max<std::size_t>(idx, 1), q.size());
    return q[idx - 1];
}

}  // namespace covcusum

#endif

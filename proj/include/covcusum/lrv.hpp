#ifndef COVCUSUM_LRV_HPP
#define COVCUSUM_LRV_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "covcusum/common.hpp"
#include "covcusum/cusum.hpp"
#include "covcusum/linproc.hpp"
#include "covcusum/projections.hpp"

namespace covcusum {

inline constexpr double kVarianceFloor = 1e-12;

/** Lag-window kernel w_mh = w(h / b_m) with truncation at lag m. */
struct KernelSpec {
    enum class Kind { bartlett, truncated };
    Kind kind = Kind::bartlett;
    double bandwidth = 1.0;
    Eigen::Index m = 1;

    static KernelSpec bartlett(Eigen::Index m) {
        if (m < 0) throw std::invalid_argument("KernelSpec: m < 0");
        return KernelSpec{Kind::bartlett, static_cast<double>(std::max<Eigen::Index>(m, 1)), m};
    }
    static KernelSpec truncated(Eigen::Index m) {
        if (m < 0) throw std::invalid_argument("KernelSpec: m < 0");
        return KernelSpec{Kind::truncated, static_cast<double>(std::max<Eigen::Index>(m, 1)), m};
    }
    /** Default tuning: bartlett with m = ceil(n^{1/3}), b_m = m. */
    static KernelSpec default_for(Eigen::Index n) {
        if (n < 1) throw std::invalid_argument("KernelSpec: n < 1");
        auto m = static_cast<Eigen::Index>(std::ceil(std::pow(static_cast<double>(n), 1.0 / 3.0) - 1e-9));
        return bartlett(m);
    }

    double weight(Eigen::Index h) const {
        double x = static_cast<double>(h) / bandwidth;
        switch (kind) {
            case Kind::bartlett: return std::max(0.0, 1.0 - std::abs(x));
            case Kind::truncated: return std::abs(x) <= 1.0 ? 1.0 : 0.0;
        }
        throw std::logic_error("unreachable");
    }
};

struct LrvEstimate {
    double value = 0.0;
    double u = 1.0;
    Eigen::Index m = 0;
    bool floor_applied = false;
};

namespace detail {

inline double gamma_from_products(const Vector& pj, const Vector& pk, Eigen::Index N, Eigen::Index h) {
    if (h < 0) throw std::invalid_argument("gamma_hat: h < 0");
    if (N < 1 || N > pj.size()) throw std::invalid_argument("gamma_hat: invalid sample fraction");
    if (N - h < 1) throw std::invalid_argument("gamma_hat: lag h too large for the sample fraction");
    const double cj = pj.head(N).mean();
    const double ck = pk.head(N).mean();
    double s = 0.0;
    for (Eigen::Index i = 0; i < N - h; ++i) s += (pj[i] - cj) * (pk[i + h] - ck);
    return s / static_cast<double>(N);
}

inline LrvEstimate floor_estimate(double raw, double u, Eigen::Index m) {
    LrvEstimate e{raw, u, m, false};
    if (raw <= kVarianceFloor) {
        e.value = kVarianceFloor;
        e.floor_applied = true;
    }
    return e;
}

/** Windowed sum over the first N products of the two series, symmetrized in
 *  the pair order at positive lags so the (j,k) and (k,j) values coincide. */
inline LrvEstimate beta2_from_products(const Vector& pj, const Vector& pk, Eigen::Index N, double u,
                                       const KernelSpec& kernel) {
    if (N <= kernel.m)
        throw std::invalid_argument("lrv: lag truncation m must be smaller than the sample fraction");
    double value = gamma_from_products(pj, pk, N, 0);
    for (Eigen::Index h = 1; h <= kernel.m; ++h)
        value += kernel.weight(h) *
                 (gamma_from_products(pj, pk, N, h) + gamma_from_products(pk, pj, N, h));
    return floor_estimate(value, u, kernel.m);
}

}  // namespace detail

/** Sample cross-autocovariance at lag h of the projected product series of
 *  two pairs, both centered at their means over 1..floor(n u). */
inline double gamma_hat(const Series& series, const ProjectionPair& pair_j, const ProjectionPair& pair_k,
                        double u, Eigen::Index h) {
    if (!(u > 0.0 && u <= 1.0)) throw std::invalid_argument("gamma_hat: u outside (0,1]");
    Vector pj = projected_products(series, pair_j.v, pair_j.w);
    Vector pk = projected_products(series, pair_k.v, pair_k.w);
    return detail::gamma_from_products(pj, pk, floor_frac_count(series.rows(), u), h);
}

/** alpha2_hat(u) = Gamma(u;0) + 2 sum_{h=1}^m w_mh Gamma(u;h). */
inline LrvEstimate alpha2_hat(const Series& series, const Vector& v, const Vector& w, double u,
                              const KernelSpec& kernel) {
    if (!(u > 0.0 && u <= 1.0)) throw std::invalid_argument("alpha2_hat: u outside (0,1]");
    Vector p = projected_products(series, v, w);
    const Eigen::Index N = floor_frac_count(series.rows(), u);
    if (N <= kernel.m)
        throw std::invalid_argument("alpha2_hat: lag truncation m must be smaller than floor(n u)");
    double value = detail::gamma_from_products(p, p, N, 0);
    for (Eigen::Index h = 1; h <= kernel.m; ++h)
        value += 2.0 * kernel.weight(h) * detail::gamma_from_products(p, p, N, h);
    return detail::floor_estimate(value, u, kernel.m);
}

/** Two-pair analogue of alpha2_hat; coincides with it when both pairs agree. */
inline LrvEstimate beta2_hat(const Series& series, const ProjectionPair& pair_j, const ProjectionPair& pair_k,
                             double u, const KernelSpec& kernel) {
    if (!(u > 0.0 && u <= 1.0)) throw std::invalid_argument("beta2_hat: u outside (0,1]");
    Vector pj = projected_products(series, pair_j.v, pair_j.w);
    Vector pk = projected_products(series, pair_k.v, pair_k.w);
    return detail::beta2_from_products(pj, pk, floor_frac_count(series.rows(), u), u, kernel);
}

/** Correlation-form matrix beta2(j,k) / (beta(j,j) beta(k,k)) with unit
 *  diagonal, symmetrized as (M + M^T)/2. */
inline Matrix sigma_T_matrix(const Series& series, const std::vector<ProjectionPair>& pairs, double u,
                             const KernelSpec& kernel) {
    if (pairs.empty()) throw std::invalid_argument("sigma_T_matrix: empty pair list");
    const auto L = static_cast<Eigen::Index>(pairs.size());
    const Eigen::Index N = floor_frac_count(series.rows(), u);
    std::vector<Vector> p(pairs.size());
    for (std::size_t j = 0; j < pairs.size(); ++j)
        p[j] = projected_products(series, pairs[j].v, pairs[j].w);
    Vector diag(L);
    for (Eigen::Index j = 0; j < L; ++j) {
        LrvEstimate e = detail::beta2_from_products(p[static_cast<std::size_t>(j)],
                                                    p[static_cast<std::size_t>(j)], N, u, kernel);
        if (e.floor_applied)
            throw std::runtime_error("sigma_T_matrix: degenerate variance for pair " + std::to_string(j + 1) +
                                     "; drop this pair");
        diag[j] = std::sqrt(e.value);
    }
    Matrix s = Matrix::Identity(L, L);
    for (Eigen::Index j = 0; j < L; ++j)
        for (Eigen::Index k = j + 1; k < L; ++k) {
            LrvEstimate e = detail::beta2_from_products(p[static_cast<std::size_t>(j)],
                                                        p[static_cast<std::size_t>(k)], N, u, kernel);
            s(j, k) = s(k, j) = e.value / (diag[j] * diag[k]);
        }
    return (s + s.transpose()) / 2.0;
}

/** Coefficient contraction f_tilde_{ell,0} of an array under (v, w) with
 *  b_j = v^T a_j, c_j = w^T a_j:
 *  ell = 0: sum_j b_j c_j; ell >= 1: sum_j (b_j c_{j+ell} + c_j b_{j+ell}). */
inline double f_tilde(const CoefficientArray& coeffs, const Vector& v, const Vector& w, Eigen::Index ell) {
    if (ell < 0) throw std::invalid_argument("f_tilde: ell < 0");
    if (coeffs.d() != v.size() || coeffs.d() != w.size())
        throw std::invalid_argument("f_tilde: dimension mismatch");
    const Eigen::Index J = coeffs.J();
    Vector b = coeffs.a.transpose() * v;
    Vector c = coeffs.a.transpose() * w;
    double s = 0.0;
    if (ell == 0) {
        for (Eigen::Index j = 0; j <= J; ++j) s += b[j] * c[j];
    } else {
        for (Eigen::Index j = 0; j + ell <= J; ++j) s += b[j] * c[j + ell] + c[j] * b[j + ell];
    }
    return s;
}

/** Closed-form asymptotic covariance parameter
 *  beta2 = f00(b-array) f00(c-array) Var(eps^2)
 *        + sigma^4 sum_{ell>=1} f_ell(b-array) f_ell(c-array). */
inline double theoretical_beta2(const CoefficientArray& coeffs_b, const ProjectionPair& pair_1,
                                const CoefficientArray& coeffs_c, const ProjectionPair& pair_2, double sigma2,
                                double var_eps2) {
    if (!(sigma2 > 0)) throw std::invalid_argument("theoretical_beta2: sigma2 must be positive");
    if (var_eps2 < 0) throw std::invalid_argument("theoretical_beta2: var_eps2 < 0");
    double value = f_tilde(coeffs_b, pair_1.v, pair_1.w, 0) * f_tilde(coeffs_c, pair_2.v, pair_2.w, 0) * var_eps2;
    const Eigen::Index ell_max = std::min(coeffs_b.J(), coeffs_c.J());
    double tail = 0.0;
    for (Eigen::Index ell = 1; ell <= ell_max; ++ell)
        tail += f_tilde(coeffs_b, pair_1.v, pair_1.w, ell) * f_tilde(coeffs_c, pair_2.v, pair_2.w, ell);
    return value + sigma2 * sigma2 * tail;
}

inline double theoretical_alpha2(const CoefficientArray& coeffs, const Vector& v, const Vector& w, double sigma2,
                                 double var_eps2) {
    ProjectionPair p(v, w);
    return theoretical_beta2(coeffs, p, coeffs, p, sigma2, var_eps2);
}

/** In-sample estimate over the stopped sample 1..tau_tilde (u = tau_tilde/n). */
inline LrvEstimate stopped_alpha2(const Series& series, const Vector& v, const Vector& w,
                                  Eigen::Index tau_tilde, const KernelSpec& kernel) {
    const Eigen::Index n = series.rows();
    if (tau_tilde < 1 || tau_tilde > n) throw std::invalid_argument("stopped_alpha2: tau_tilde outside 1..n");
    if (tau_tilde <= kernel.m)
        throw std::invalid_argument("stopped_alpha2: tau_tilde must exceed the lag truncation m");
    Vector p = projected_products(series, v, w);
    double u = static_cast<double>(tau_tilde) / static_cast<double>(n);
    double value = detail::gamma_from_products(p, p, tau_tilde, 0);
    for (Eigen::Index h = 1; h <= kernel.m; ++h)
        value += 2.0 * kernel.weight(h) * detail::gamma_from_products(p, p, tau_tilde, h);
    return detail::floor_estimate(value, u, kernel.m);
}

}  // namespace covcusum

#endif

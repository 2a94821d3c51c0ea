#ifndef COVCUSUM_CUSUM_HPP
#define COVCUSUM_CUSUM_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "covcusum/common.hpp"
#include "covcusum/linproc.hpp"
#include "covcusum/projections.hpp"

namespace covcusum {

/** CUSUM weight: either g(t) = 1 or the power weight g(t) = [t(1-t)]^beta
 *  with beta in [0, 1/2); beta = 1/2 is excluded (law-of-iterated-logarithm
 *  boundary). */
struct WeightFunction {
    enum class Kind { none, power };
    Kind kind = Kind::none;
    double beta = 0.0;

    static WeightFunction unweighted() { return WeightFunction{}; }
    static WeightFunction power(double beta) {
        if (!(beta >= 0.0 && beta < 0.5))
            throw std::invalid_argument("WeightFunction: beta must lie in [0, 1/2)");
        return WeightFunction{Kind::power, beta};
    }

    double operator()(double t) const {
        if (kind == Kind::none) return 1.0;
        return std::pow(t * (1.0 - t), beta);
    }

    bool is_unweighted() const { return kind == Kind::none || beta == 0.0; }
};

/** p_i = (v^T Y_i)(w^T Y_i); partial sums of p reproduce U_nk = v^T S_nk w
 *  at cost O(nd). */
inline Vector projected_products(const Series& series, const Vector& v, const Vector& w) {
    if (series.cols() != v.size() || series.cols() != w.size())
        throw std::invalid_argument("projected_products: dimension mismatch");
    return (series * v).cwiseProduct(series * w);
}

struct CusumResult {
    Vector trajectory;        // index k-1 holds k = 1..n-1
    double statistic = 0.0;
    Eigen::Index argmax_k = 0;  // smallest maximizing k, 1-based
};

namespace detail {

inline CusumResult cusum_from_products(const Vector& p, const WeightFunction& g) {
    const Eigen::Index n = p.size();
    if (n < 2) throw std::invalid_argument("cusum: n < 2");
    const double sqrtn = std::sqrt(static_cast<double>(n));
    double run = 0.0;
    const double total = p.sum();
    CusumResult r;
    r.trajectory.resize(n - 1);
    for (Eigen::Index k = 1; k < n; ++k) {
        run += p[k - 1];
        double t = static_cast<double>(k) / static_cast<double>(n);
        r.trajectory[k - 1] = std::abs(run - t * total) / (sqrtn * g(t));
    }
    r.argmax_k = 1 + smallest_argmax(r.trajectory);
    r.statistic = r.trajectory[r.argmax_k - 1];
    return r;
}

}  // namespace detail

/** CUSUM trajectory |U_nk - (k/n) U_nn| / (sqrt(n) g(k/n)) over k = 1..n-1.
 *  The centered variant subtracts the sample mean row before the products. */
inline CusumResult cusum(const Series& series, const Vector& v, const Vector& w, const WeightFunction& g,
                         bool centered = false) {
    if (series.rows() < 2) throw std::invalid_argument("cusum: n < 2");
    if (centered) {
        Series c = series.rowwise() - series.colwise().mean();
        return detail::cusum_from_products(projected_products(c, v, w), g);
    }
    return detail::cusum_from_products(projected_products(series, v, w), g);
}

/** CUSUM transform: coordinate j is the weighted CUSUM statistic of pair j. */
inline Vector multivariate_transform(const Series& series, const std::vector<ProjectionPair>& pairs,
                                     const WeightFunction& g, bool centered = false) {
    if (pairs.empty()) throw std::invalid_argument("multivariate_transform: empty pair list");
    Vector out(static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t j = 0; j < pairs.size(); ++j)
        out[static_cast<Eigen::Index>(j)] = cusum(series, pairs[j].v, pairs[j].w, g, centered).statistic;
    return out;
}

/** Symmetric pseudo-inverse via eigendecomposition; eigenvalues below
 *  tol * max|eigenvalue| are treated as zero. */
inline Matrix pseudo_inverse(const Matrix& m, double tol = 1e-10) {
    if (m.rows() != m.cols()) throw std::invalid_argument("pseudo_inverse: non-square input");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("pseudo_inverse: input not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.transpose()) / 2.0);
    const Vector& lam = es.eigenvalues();
    double cutoff = tol * lam.cwiseAbs().maxCoeff();
    Vector inv = Vector::Zero(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (std::abs(lam[i]) > cutoff) inv[i] = 1.0 / lam[i];
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

/** Q_n = (T - mu*)^T pinv(Sigma_T) (T - mu*). */
inline double qn_statistic(const Vector& T, const Vector& mu_star, const Matrix& sigma_T) {
    if (T.size() != mu_star.size() || sigma_T.rows() != T.size() || sigma_T.cols() != T.size())
        throw std::invalid_argument("qn_statistic: dimension mismatch");
    if ((sigma_T - sigma_T.transpose()).cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("qn_statistic: sigma_T not symmetric");
    Vector z = T - mu_star;
    double q = z.dot(pseudo_inverse(sigma_T) * z);
    return std::max(0.0, q);
}

/** Mean drift of U_nk - (k/n) U_nn under a single change at tau with
 *  covariance-difference contraction delta:
 *  m_n(k) = k (n-tau)/n delta for k <= tau, tau (n-k)/n delta for k > tau. */
inline double drift_mn(Eigen::Index k, Eigen::Index n, Eigen::Index tau, double delta) {
    if (k < 1 || k > n) throw std::invalid_argument("drift_mn: k outside 1..n");
    if (tau < 1 || tau > n) throw std::invalid_argument("drift_mn: tau outside 1..n");
    double kk = static_cast<double>(k), nn = static_cast<double>(n), tt = static_cast<double>(tau);
    if (k <= tau) return kk * (nn - tt) / nn * delta;
    return tt * (nn - kk) / nn * delta;
}

/** Contraction v^T (Sigma_0 - Sigma_1) w from coefficient arrays, the exact
 *  delta entering drift_mn. */
inline double delta_contraction(const CoefficientArray& pre, const CoefficientArray& post, const Vector& v,
                                const Vector& w, double sigma2 = 1.0) {
    return v.dot(pre.autocovariance(0, sigma2) * w) - v.dot(post.autocovariance(0, sigma2) * w);
}

}  // namespace covcusum

#endif

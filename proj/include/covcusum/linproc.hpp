#ifndef COVCUSUM_LINPROC_HPP
#define COVCUSUM_LINPROC_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "covcusum/common.hpp"

namespace covcusum {

/** Coefficient array a^{(nu)}_j of a truncated linear process
 *  Y_i^{(nu)} = sum_{j=0}^{J} a^{(nu)}_j eps_{i-j}, nu = 1..d.
 *  Row nu-1 holds the coefficients of coordinate nu; column j is lag j. */
struct CoefficientArray {
    Matrix a;  // d x (J+1)
    std::optional<double> decay_theta;

    CoefficientArray() = default;
    explicit CoefficientArray(Matrix coeffs, std::optional<double> theta = std::nullopt)
        : a(std::move(coeffs)), decay_theta(theta) {
        if (!a.allFinite()) throw std::invalid_argument("CoefficientArray: non-finite coefficient");
        if (a.rows() < 1 || a.cols() < 1) throw std::invalid_argument("CoefficientArray: empty array");
    }

    Eigen::Index d() const { return a.rows(); }
    Eigen::Index J() const { return a.cols() - 1; }

    /** Lag-h autocovariance sigma2 * sum_j a_j a_{j+h}^T implied by the array. */
    Matrix autocovariance(Eigen::Index h, double sigma2 = 1.0) const {
        if (h < 0) throw std::invalid_argument("autocovariance: h < 0");
        Matrix s = Matrix::Zero(d(), d());
        for (Eigen::Index j = 0; j + h <= J(); ++j)
            s += a.col(j) * a.col(j + h).transpose();
        return sigma2 * s;
    }

    /** Informational check of the decay condition: returns the smallest K with
     *  max_nu |a_j| <= K * max(1,j)^(-3/4 - theta/2) for all j. */
    double decay_constant() const {
        if (!decay_theta) throw std::invalid_argument("decay_constant: decay_theta not set");
        double expo = -0.75 - *decay_theta / 2.0;
        double K = 0.0;
        for (Eigen::Index j = 0; j <= J(); ++j) {
            double bound = std::pow(std::max<double>(1.0, static_cast<double>(j)), expo);
            K = std::max(K, a.col(j).cwiseAbs().maxCoeff() / bound);
        }
        return K;
    }
};

enum class Distribution { gaussian, rademacher, scaled_t };

/** Centered i.i.d. innovation specification with finite fourth moment. */
struct InnovationSpec {
    Distribution distribution = Distribution::gaussian;
    double variance = 1.0;
    double df = 0.0;  // scaled-t only
    std::uint64_t seed = 0;

    void validate() const {
        if (!(variance > 0)) throw std::invalid_argument("InnovationSpec: variance must be positive");
        if (distribution == Distribution::scaled_t && !(df > 4))
            throw std::invalid_argument("InnovationSpec: scaled-t needs df > 4 for a finite fourth moment");
    }

    /** Var(eps^2) = E(eps^4) - sigma^4, the variance of the squared innovation. */
    double var_eps2() const {
        validate();
        double s4 = variance * variance;
        switch (distribution) {
            case Distribution::gaussian: return 2.0 * s4;
            case Distribution::rademacher: return 0.0;
            case Distribution::scaled_t: return (2.0 + 6.0 / (df - 4.0)) * s4;
        }
        throw std::logic_error("unreachable");
    }
};

/** Innovation stream for times 1-J .. n stored back-to-front-agnostically:
 *  eps[t] with t in [1-J, n] lives at position t+J-1. Times 1..n are drawn
 *  first and the presample 0,-1,..,1-J afterwards, so the realized values of
 *  eps_1..eps_n do not depend on J (splice and prefix invariants rely on it). */
struct InnovationStream {
    std::vector<double> values;
    Eigen::Index J = 0;

    double at(Eigen::Index t) const { return values[static_cast<std::size_t>(t + J - 1)]; }
};

namespace detail {

class InnovationSampler {
  public:
    explicit InnovationSampler(const InnovationSpec& spec)
        : spec_(spec), rng_(spec.seed), normal_(0.0, 1.0), student_(spec.distribution == Distribution::scaled_t ? spec.df : 5.0) {
        spec.validate();
        sd_ = std::sqrt(spec.variance);
        if (spec.distribution == Distribution::scaled_t)
            t_scale_ = sd_ / std::sqrt(spec.df / (spec.df - 2.0));
    }

    double operator()() {
        switch (spec_.distribution) {
            case Distribution::gaussian: return sd_ * normal_(rng_);
            case Distribution::rademacher: return (rng_() & 1ULL) ? sd_ : -sd_;
            case Distribution::scaled_t: return t_scale_ * student_(rng_);
        }
        throw std::logic_error("unreachable");
    }

  private:
    InnovationSpec spec_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_;
    std::student_t_distribution<double> student_;
    double sd_ = 1.0;
    double t_scale_ = 1.0;
};

}  // namespace detail

inline InnovationStream draw_innovations(const InnovationSpec& innov, Eigen::Index n, Eigen::Index J) {
    if (n < 1) throw std::invalid_argument("draw_innovations: n < 1");
    if (J < 0) throw std::invalid_argument("draw_innovations: J < 0");
    detail::InnovationSampler sample(innov);
    InnovationStream s;
    s.J = J;
    s.values.assign(static_cast<std::size_t>(n + J), 0.0);
    for (Eigen::Index t = 1; t <= n; ++t) s.values[static_cast<std::size_t>(t + J - 1)] = sample();
    for (Eigen::Index t = 0; t >= 1 - J; --t) s.values[static_cast<std::size_t>(t + J - 1)] = sample();
    return s;
}

/** Exact truncated-MA filter of a given innovation stream (must cover 1-J..n). */
inline Series filter_series(const CoefficientArray& coeffs, const InnovationStream& eps, Eigen::Index n) {
    if (n < 1) throw std::invalid_argument("filter_series: n < 1");
    if (eps.J < coeffs.J()) throw std::invalid_argument("filter_series: stream presample shorter than J");
    Series y = Series::Zero(n, coeffs.d());
    const Eigen::Index J = coeffs.J();
    for (Eigen::Index i = 1; i <= n; ++i) {
        for (Eigen::Index j = 0; j <= J; ++j) {
            double e = eps.at(i - j);
            if (e != 0.0) y.row(i - 1) += e * coeffs.a.col(j).transpose();
        }
    }
    return y;
}

inline Series simulate_linear(const CoefficientArray& coeffs, const InnovationSpec& innov, Eigen::Index n) {
    return filter_series(coeffs, draw_innovations(innov, n, coeffs.J()), n);
}

/** Change-point model (pre-change coefficients, post-change coefficients,
 *  change index tau; tau = n means no change). */
struct ChangePointModel {
    CoefficientArray pre;
    CoefficientArray post;
    Eigen::Index tau = 0;
    Eigen::Index n = 0;

    void validate() const {
        if (pre.d() != post.d()) throw std::invalid_argument("ChangePointModel: regime dimension mismatch");
        if (n < 1 || tau < 1 || tau > n) throw std::invalid_argument("ChangePointModel: need 1 <= tau <= n");
    }
};

/** Simulates the change model: rows 1..tau from the pre filter, rows tau+1..n
 *  from the post filter, both applied to one shared innovation stream. */
inline Series simulate_change_model(const ChangePointModel& model, const InnovationSpec& innov) {
    model.validate();
    const Eigen::Index J = std::max(model.pre.J(), model.post.J());
    InnovationStream eps = draw_innovations(innov, model.n, J);
    Series y = filter_series(model.pre, eps, model.n);
    if (model.tau < model.n) {
        Series ypost = filter_series(model.post, eps, model.n);
        y.bottomRows(model.n - model.tau) = ypost.bottomRows(model.n - model.tau);
    }
    return y;
}

/** MA representation of the spiked covariance model: spike directions enter at
 *  lags 0..r-1 and coordinate nu receives its own noise weight sigma at lag
 *  r-1+nu, so distinct coordinates draw the noise from distinct lags. */
inline CoefficientArray spiked_coefficients(const Vector& lambdas, const Matrix& U, double sigma) {
    const Eigen::Index r = lambdas.size();
    const Eigen::Index d = U.rows();
    if (U.cols() != r) throw std::invalid_argument("spiked_coefficients: U must have one column per lambda");
    if (!(sigma > 0)) throw std::invalid_argument("spiked_coefficients: sigma must be positive");
    for (Eigen::Index j = 0; j < r; ++j)
        if (!(lambdas[j] > 0)) throw std::invalid_argument("spiked_coefficients: lambdas must be positive");
    if (r > 0) {
        Matrix gram = U.transpose() * U;
        if ((gram - Matrix::Identity(r, r)).cwiseAbs().maxCoeff() > 1e-10)
            throw std::invalid_argument("spiked_coefficients: U columns not orthonormal");
    }
    Matrix a = Matrix::Zero(d, r + d);  // J = r + d - 1
    for (Eigen::Index j = 0; j < r; ++j) a.col(j) = std::sqrt(lambdas[j]) * U.col(j);
    for (Eigen::Index nu = 1; nu <= d; ++nu) a(nu - 1, r - 1 + nu) = sigma;
    return CoefficientArray(std::move(a));
}

inline Matrix spiked_covariance_matrix(const Vector& lambdas, const Matrix& U, double sigma) {
    const Eigen::Index d = U.rows();
    if (U.cols() != lambdas.size()) throw std::invalid_argument("spiked_covariance_matrix: U/lambda size mismatch");
    Matrix s = sigma * sigma * Matrix::Identity(d, d);
    for (Eigen::Index j = 0; j < lambdas.size(); ++j)
        s += lambdas[j] * U.col(j) * U.col(j).transpose();
    return s;
}

struct VarmaCoefficients {
    std::vector<Matrix> phi;  // Phi_0..Phi_J
    bool growth_warning = false;
};

/** MA(infinity) coefficients of a VARMA(p,r) model by the standard recursion
 *  Phi_0 = I, Phi_j = M_j + sum_{k=1}^{j} A_k Phi_{j-k}. Stability is the
 *  caller's concern; growth_warning flags |Phi_J|_max exceeding |Phi_0|_max. */
inline VarmaCoefficients varma_ma_coefficients(const std::vector<Matrix>& A, const std::vector<Matrix>& M,
                                               Eigen::Index J) {
    if (J < 0) throw std::invalid_argument("varma_ma_coefficients: J < 0");
    Eigen::Index d = -1;
    for (const auto& mats : {A, M})
        for (const Matrix& m : mats) {
            if (m.rows() != m.cols()) throw std::invalid_argument("varma_ma_coefficients: non-square matrix");
            if (d < 0) d = m.rows();
            if (m.rows() != d) throw std::invalid_argument("varma_ma_coefficients: dimension mismatch");
        }
    if (d < 0) throw std::invalid_argument("varma_ma_coefficients: empty model");
    VarmaCoefficients out;
    out.phi.reserve(static_cast<std::size_t>(J + 1));
    out.phi.push_back(Matrix::Identity(d, d));
    for (Eigen::Index j = 1; j <= J; ++j) {
        Matrix phi = (j <= static_cast<Eigen::Index>(M.size())) ? M[static_cast<std::size_t>(j - 1)]
                                                                : Matrix::Zero(d, d);
        for (Eigen::Index k = 1; k <= std::min<Eigen::Index>(j, static_cast<Eigen::Index>(A.size())); ++k)
            phi += A[static_cast<std::size_t>(k - 1)] * out.phi[static_cast<std::size_t>(j - k)];
        out.phi.push_back(std::move(phi));
    }
    out.growth_warning = out.phi.back().cwiseAbs().maxCoeff() > out.phi.front().cwiseAbs().maxCoeff();
    return out;
}

/** Flattens matrix MA coefficients driven by a q-variate innovation into a
 *  scalar-innovation CoefficientArray by assigning innovation coordinate l
 *  the lag offset lag_offsets[l]: a^{(nu)}_{k} = sum_l Phi_{k - r_l}(nu, l). */
inline CoefficientArray flatten_ma_coefficients(const std::vector<Matrix>& phi,
                                                const std::vector<Eigen::Index>& lag_offsets,
                                                Eigen::Index J) {
    if (phi.empty()) throw std::invalid_argument("flatten_ma_coefficients: empty coefficient list");
    const Eigen::Index d = phi.front().rows();
    const Eigen::Index q = phi.front().cols();
    if (static_cast<Eigen::Index>(lag_offsets.size()) != q)
        throw std::invalid_argument("flatten_ma_coefficients: one lag offset per innovation coordinate required");
    Matrix a = Matrix::Zero(d, J + 1);
    for (Eigen::Index l = 0; l < q; ++l) {
        if (lag_offsets[static_cast<std::size_t>(l)] < 0)
            throw std::invalid_argument("flatten_ma_coefficients: negative lag offset");
        for (std::size_t j = 0; j < phi.size(); ++j) {
            Eigen::Index k = static_cast<Eigen::Index>(j) + lag_offsets[static_cast<std::size_t>(l)];
            if (k > J) break;
            a.col(k) += phi[j].col(l);
        }
    }
    return CoefficientArray(std::move(a));
}

/** The simulation-study model: pre-change AR(1) coordinates rho_nu = 0.5 nu/d
 *  driven by the lagged shared innovation, post-change MA(4) with coordinate
 *  nu shifted by 4(nu-1) lags and variance-preserving theta weights. */
inline ChangePointModel table1_model(Eigen::Index n, Eigen::Index d, Eigen::Index tau = -1) {
    if (n < 1 || d < 1) throw std::invalid_argument("table1_model: need n, d >= 1");
    if (tau < 0) tau = n;
    const double rho_max = 0.5;
    const Eigen::Index Jpre = static_cast<Eigen::Index>(std::ceil(std::log(1e-12) / std::log(rho_max)));
    Matrix pre = Matrix::Zero(d, Jpre + 1);
    for (Eigen::Index nu = 1; nu <= d; ++nu) {
        double rho = 0.5 * static_cast<double>(nu) / static_cast<double>(d);
        double pw = 1.0;
        for (Eigen::Index j = 1; j <= Jpre; ++j) {
            pre(nu - 1, j) = pw;
            pw *= rho;
        }
    }
    double s_theta2 = 0.0;
    for (int k = 0; k <= 4; ++k) s_theta2 += (1.0 - 0.1 * k) * (1.0 - 0.1 * k);
    Matrix post = Matrix::Zero(d, 4 * d + 1);
    for (Eigen::Index nu = 1; nu <= d; ++nu) {
        double rho = 0.5 * static_cast<double>(nu) / static_cast<double>(d);
        double scale = std::sqrt(1.0 / (1.0 - rho * rho) / s_theta2);
        for (Eigen::Index j = 0; j <= 4; ++j)
            post(nu - 1, j + 4 * (nu - 1)) = (1.0 - 0.1 * static_cast<double>(j)) * scale;
    }
    ChangePointModel model{CoefficientArray(std::move(pre)), CoefficientArray(std::move(post)), tau, n};
    model.validate();
    return model;
}

}  // namespace covcusum

#endif

#ifndef COVCUSUM_HARNESS_HPP
#define COVCUSUM_HARNESS_HPP

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "covcusum/common.hpp"
#include "covcusum/cusum.hpp"
#include "covcusum/dist.hpp"
#include "covcusum/linproc.hpp"
#include "covcusum/lrv.hpp"
#include "covcusum/projections.hpp"
#include "covcusum/testing.hpp"

namespace covcusum {

enum class ProjectionKind { fixed_uniform, dirichlet };

struct StudyConfig {
    Eigen::Index n = 100;
    std::vector<Eigen::Index> d_list{10};      // dimension d (power study) or projection count r (global study)
    std::vector<double> theta_list{0.25, 0.5, 0.75, 1.0};
    Eigen::Index reps = 1000;
    double level = 0.05;
    WeightFunction weight = WeightFunction::unweighted();
    LrvMode lrv_mode = LrvMode::learning;
    Eigen::Index learning_size = 500;
    ProjectionKind projection = ProjectionKind::fixed_uniform;
    std::uint64_t base_seed = 20191205;

    Eigen::Index quantile_grid = 1000;  // MC table for the weighted quantile
    Eigen::Index quantile_reps = 20000;

    Eigen::Index global_d = 10;  // global (Q_n) study settings
    Eigen::Index global_learning_size = 2000;
    Eigen::Index null_reps = 1500;
    Eigen::Index mu_reps = 20000;

    void validate() const {
        if (n < 2) throw std::invalid_argument("StudyConfig: n < 2");
        if (reps < 1) throw std::invalid_argument("StudyConfig: reps < 1");
        if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("StudyConfig: level outside (0,1)");
        if (d_list.empty() || theta_list.empty()) throw std::invalid_argument("StudyConfig: empty d/theta list");
        for (Eigen::Index d : d_list)
            if (d < 1) throw std::invalid_argument("StudyConfig: d < 1");
        for (double t : theta_list)
            if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("StudyConfig: theta outside (0,1]");
        if (lrv_mode == LrvMode::learning && learning_size < 2)
            throw std::invalid_argument("StudyConfig: learning_size < 2");
    }
};

struct StudyCell {
    std::string method;
    std::string lrv_mode;
    double theta = 0.0;
    Eigen::Index d = 0;  // dimension (power study) or r (global study)
    double rejection_rate = 0.0;
    Eigen::Index reps = 0;
    std::uint64_t seed = 0;
};

using StudyTable = std::vector<StudyCell>;

namespace detail {

inline std::uint64_t theta_bits(double theta) { return std::bit_cast<std::uint64_t>(theta); }

inline std::uint64_t cell_seed(const StudyConfig& cfg, Eigen::Index d, double theta, Eigen::Index rep) {
    return derive_seed(cfg.base_seed,
                       {static_cast<std::uint64_t>(d), theta_bits(theta), static_cast<std::uint64_t>(rep)});
}

}  // namespace detail

/** Monte Carlo power study of the standardized CUSUM test on the AR-to-MA
 *  change model: for each (d, theta) cell, simulate, estimate the variance
 *  per lrv_mode, test at the configured level, record the rejection rate. */
inline StudyTable run_power_study(const StudyConfig& cfg) {
    cfg.validate();
    const double p = 1.0 - cfg.level;
    const double quantile = cfg.weight.is_unweighted()
                                ? kolmogorov_quantile(p)
                                : bridge_sup_quantile(cfg.weight, cfg.quantile_grid, cfg.quantile_reps, p,
                                                      derive_seed(cfg.base_seed, {0x7175616e74ULL}));
    const std::string method = cfg.weight.is_unweighted() ? "cusum" : "cusum-weighted";
    StudyTable table;
    for (Eigen::Index d : cfg.d_list) {
        Vector v = cfg.projection == ProjectionKind::fixed_uniform
                       ? uniform_projection(d)
                       : dirichlet_projection(d, 1.0, derive_seed(cfg.base_seed, {static_cast<std::uint64_t>(d), 0x70726f6aULL}));
        for (double theta : cfg.theta_list) {
            const Eigen::Index tau = theta >= 1.0 ? cfg.n : floor_frac_count(cfg.n, theta);
            const ChangePointModel model = table1_model(cfg.n, d, tau);
            Eigen::Index rejections = 0;
            for (Eigen::Index rep = 0; rep < cfg.reps; ++rep) {
                const std::uint64_t rep_seed = detail::cell_seed(cfg, d, theta, rep);
                Series y = simulate_change_model(model, {Distribution::gaussian, 1.0, 0.0, rep_seed});
                TestReport r;
                if (cfg.lrv_mode == LrvMode::learning) {
                    Series learn = simulate_linear(model.pre,
                                                   {Distribution::gaussian, 1.0, 0.0,
                                                    derive_seed(rep_seed, {0x6c6561726eULL})},
                                                   cfg.learning_size);
                    r = run_test(y, v, v, cfg.weight, cfg.level, quantile, cfg.lrv_mode, &learn);
                } else {
                    r = run_test(y, v, v, cfg.weight, cfg.level, quantile, cfg.lrv_mode);
                }
                if (r.decision) ++rejections;
            }
            table.push_back({method, to_string(cfg.lrv_mode), theta, d,
                             static_cast<double>(rejections) / static_cast<double>(cfg.reps), cfg.reps,
                             detail::cell_seed(cfg, d, theta, 0)});
        }
    }
    return table;
}

/** Orthonormalized Dirichlet-seeded projection pairs: r simplex draws run
 *  through Gram-Schmidt, each kept as an identical (v, w) pair. Substitute
 *  for data-derived sparse principal directions, which have no public source. */
inline std::vector<ProjectionPair> orthonormal_dirichlet_pairs(Eigen::Index d, Eigen::Index r,
                                                               std::uint64_t seed) {
    if (r < 1 || r > d) throw std::invalid_argument("orthonormal_dirichlet_pairs: need 1 <= r <= d");
    Matrix basis(d, r);
    for (Eigen::Index j = 0; j < r; ++j)
        basis.col(j) = dirichlet_projection(d, 1.0, derive_seed(seed, {static_cast<std::uint64_t>(j)}));
    for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index k = 0; k < j; ++k) basis.col(j) -= basis.col(k).dot(basis.col(j)) * basis.col(k);
        double norm = basis.col(j).norm();
        if (norm < 1e-10) throw std::runtime_error("orthonormal_dirichlet_pairs: degenerate draw");
        basis.col(j) /= norm;
    }
    std::vector<ProjectionPair> pairs;
    pairs.reserve(static_cast<std::size_t>(r));
    for (Eigen::Index j = 0; j < r; ++j) pairs.emplace_back(basis.col(j), basis.col(j));
    return pairs;
}

/** Monte Carlo level/power study of the omnibus Q_n test: per r, an L = r
 *  CUSUM transform standardized by learning-sample scales, compared against
 *  the correlated-bridge null quantile conditional on each replicate's
 *  estimated correlation matrix. Shared null noise is recombined per
 *  replicate, so results match the one-shot simulator bit for bit. */
inline StudyTable run_global_study(const StudyConfig& cfg) {
    cfg.validate();
    const double p = 1.0 - cfg.level;
    const Eigen::Index d = cfg.global_d;
    const Eigen::Index L_learn = cfg.global_learning_size;
    const KernelSpec kernel = KernelSpec::default_for(L_learn);
    const double mu = mu_star(cfg.weight, cfg.n, cfg.mu_reps, derive_seed(cfg.base_seed, {0x6d757374ULL}));
    StudyTable table;
    for (Eigen::Index r_count : cfg.d_list) {
        if (r_count > d) throw std::invalid_argument("run_global_study: r exceeds the model dimension");
        std::vector<ProjectionPair> pairs =
            orthonormal_dirichlet_pairs(d, r_count, derive_seed(cfg.base_seed, {0x70616972ULL}));
        BridgeNoise noise = BridgeNoise::draw(
            cfg.n, r_count, cfg.null_reps,
            derive_seed(cfg.base_seed, {0x6e6f697365ULL, static_cast<std::uint64_t>(r_count)}));
        for (double theta : cfg.theta_list) {
            const Eigen::Index tau = theta >= 1.0 ? cfg.n : floor_frac_count(cfg.n, theta);
            const ChangePointModel model = table1_model(cfg.n, d, tau);
            Eigen::Index rejections = 0;
            for (Eigen::Index rep = 0; rep < cfg.reps; ++rep) {
                const std::uint64_t rep_seed = detail::cell_seed(cfg, r_count, theta, rep);
                Series y = simulate_change_model(model, {Distribution::gaussian, 1.0, 0.0, rep_seed});
                Series learn = simulate_linear(
                    model.pre, {Distribution::gaussian, 1.0, 0.0, derive_seed(rep_seed, {0x6c6561726eULL})},
                    L_learn);
                Matrix sigma_T = sigma_T_matrix(learn, pairs, 1.0, kernel);
                Vector T = multivariate_transform(y, pairs, cfg.weight);
                for (std::size_t j = 0; j < pairs.size(); ++j) {
                    LrvEstimate e = beta2_hat(learn, pairs[j], pairs[j], 1.0, kernel);
                    T[static_cast<Eigen::Index>(j)] /= std::sqrt(e.value);
                }
                double q_obs = qn_statistic(T, Vector::Constant(T.size(), mu), sigma_T);
                double q_crit = detail::qn_null_quantile_core(sigma_T, noise, cfg.weight, p, mu);
                if (q_obs > q_crit) ++rejections;
            }
            table.push_back({"qn-global", "learning", theta, r_count,
                             static_cast<double>(rejections) / static_cast<double>(cfg.reps), cfg.reps,
                             detail::cell_seed(cfg, r_count, theta, 0)});
        }
    }
    return table;
}

}  // namespace covcusum

#endif

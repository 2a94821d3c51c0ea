#ifndef COVCUSUM_TESTING_HPP
#define COVCUSUM_TESTING_HPP

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "covcusum/common.hpp"
#include "covcusum/cpe.hpp"
#include "covcusum/cusum.hpp"
#include "covcusum/dist.hpp"
#include "covcusum/lrv.hpp"

namespace covcusum {

struct TestReport {
    double statistic = 0.0;  // T_n (or Q_n)
    double c_n = 0.0;
    double alpha_hat = 0.0;
    double quantile = 0.0;
    double level = 0.0;
    bool decision = false;
    Eigen::Index tau_hat = 0;
    std::optional<Eigen::Index> tau_tilde;
    std::map<std::string, std::string> settings;
    std::vector<std::string> warnings;
};

/** Standardized CUSUM test: T_n = C_n(g) / alpha_hat, rejecting when T_n
 *  exceeds the supplied 1-level quantile (Kolmogorov for g = 1, Monte Carlo
 *  table otherwise). */
inline TestReport perform_test(const Series& series, const Vector& v, const Vector& w, const WeightFunction& g,
                               double alpha_hat, double level, double quantile, bool centered = false) {
    if (!(alpha_hat > 0)) throw std::invalid_argument("perform_test: degenerate variance estimate (alpha_hat <= 0)");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("perform_test: level outside (0,1)");
    CusumResult c = cusum(series, v, w, g, centered);
    TestReport r;
    r.c_n = c.statistic;
    r.alpha_hat = alpha_hat;
    r.statistic = c.statistic / alpha_hat;
    r.quantile = quantile;
    r.level = level;
    r.decision = r.statistic > quantile;
    r.tau_hat = c.argmax_k;
    return r;
}

enum class LrvMode { learning, full, stopped };

inline std::string to_string(LrvMode mode) {
    switch (mode) {
        case LrvMode::learning: return "learning";
        case LrvMode::full: return "full";
        case LrvMode::stopped: return "stopped";
    }
    throw std::logic_error("unreachable");
}

/** One-stop test runner handling the three variance-estimation modes:
 *  learning uses a separate change-free series, full uses the whole sample,
 *  stopped re-estimates on 1..tau_tilde from the stopped rule. */
inline TestReport run_test(const Series& series, const Vector& v, const Vector& w, const WeightFunction& g,
                           double level, double quantile, LrvMode mode, const Series* learning = nullptr,
                           std::optional<KernelSpec> kernel = std::nullopt, bool centered = false) {
    const Eigen::Index n = series.rows();
    LrvEstimate est;
    std::optional<Eigen::Index> tau_tilde;
    switch (mode) {
        case LrvMode::learning: {
            if (learning == nullptr) throw std::invalid_argument("run_test: learning mode needs a learning series");
            KernelSpec k = kernel ? *kernel : KernelSpec::default_for(learning->rows());
            est = alpha2_hat(*learning, v, w, 1.0, k);
            break;
        }
        case LrvMode::full: {
            KernelSpec k = kernel ? *kernel : KernelSpec::default_for(n);
            est = alpha2_hat(series, v, w, 1.0, k);
            break;
        }
        case LrvMode::stopped: {
            KernelSpec k = kernel ? *kernel : KernelSpec::default_for(n);
            Eigen::Index tau_hat = estimate_tau(series, v, w, g, centered);
            tau_tilde = stopped_rule(tau_hat, n);
            est = stopped_alpha2(series, v, w, *tau_tilde, k);
            break;
        }
    }
    TestReport r = perform_test(series, v, w, g, std::sqrt(est.value), level, quantile, centered);
    r.tau_tilde = tau_tilde;
    r.settings["lrv_mode"] = to_string(mode);
    r.settings["lrv_m"] = std::to_string(est.m);
    r.settings["lrv_u"] = std::to_string(est.u);
    if (est.floor_applied) r.warnings.push_back("variance estimate floored; statistic unreliable");
    return r;
}

}  // namespace covcusum

#endif

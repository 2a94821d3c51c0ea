#ifndef COVCUSUM_CPE_HPP
#define COVCUSUM_CPE_HPP

#include <stdexcept>

#include "covcusum/common.hpp"
#include "covcusum/cusum.hpp"

namespace covcusum {

/** Change-point estimator: smallest maximizer of the weighted CUSUM
 *  trajectory (the 1/n scaling of the defining argmax leaves the maximizer
 *  unchanged relative to the 1/sqrt(n) trajectory). */
inline Eigen::Index estimate_tau(const Series& series, const Vector& v, const Vector& w,
                                 const WeightFunction& g, bool centered = false) {
    return cusum(series, v, w, g, centered).argmax_k;
}

/** Stopped-sample rule tau_tilde = max(floor(n/4), min(1.15 tau_hat, n)),
 *  rounding half up. */
inline Eigen::Index stopped_rule(Eigen::Index tau_hat, Eigen::Index n) {
    if (n < 1 || tau_hat < 1 || tau_hat > n) throw std::invalid_argument("stopped_rule: need 1 <= tau_hat <= n");
    Eigen::Index scaled = round_half_up(1.15 * static_cast<double>(tau_hat));
    return std::max<Eigen::Index>(n / 4, std::min<Eigen::Index>(scaled, n));
}

}  // namespace covcusum

#endif

#ifndef COVCUSUM_PROJECTIONS_HPP
#define COVCUSUM_PROJECTIONS_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "covcusum/common.hpp"

namespace covcusum {

/** A pair of weighting vectors (v, w) with cached norms. */
struct ProjectionPair {
    Vector v;
    Vector w;
    double v_l1 = 0, v_l2 = 0, w_l1 = 0, w_l2 = 0;

    ProjectionPair() = default;
    ProjectionPair(Vector v_, Vector w_) : v(std::move(v_)), w(std::move(w_)) {
        if (v.size() != w.size()) throw std::invalid_argument("ProjectionPair: dimension mismatch");
        if (!v.allFinite() || !w.allFinite()) throw std::invalid_argument("ProjectionPair: non-finite entry");
        v_l1 = v.lpNorm<1>();
        v_l2 = v.norm();
        w_l1 = w.lpNorm<1>();
        w_l2 = w.norm();
        if (v_l2 == 0 || w_l2 == 0) throw std::invalid_argument("ProjectionPair: zero vector");
    }

    Eigen::Index d() const { return v.size(); }
};

inline Vector uniform_projection(Eigen::Index d) {
    if (d < 1) throw std::invalid_argument("uniform_projection: d < 1");
    return Vector::Constant(d, 1.0 / static_cast<double>(d));
}

/** Group-mean vector: 1/|set| on the index set (1-based), 0 elsewhere. With
 *  decay_r the i-th member of the sorted set gets 1/(i+1)^r instead. */
inline Vector block_projection(Eigen::Index d, const std::set<Eigen::Index>& index_set,
                               std::optional<double> decay_r = std::nullopt) {
    if (d < 1) throw std::invalid_argument("block_projection: d < 1");
    if (index_set.empty()) throw std::invalid_argument("block_projection: empty index set");
    for (Eigen::Index i : index_set)
        if (i < 1 || i > d) throw std::invalid_argument("block_projection: index outside 1..d");
    Vector out = Vector::Zero(d);
    if (decay_r) {
        Eigen::Index pos = 1;
        for (Eigen::Index i : index_set) out[i - 1] = std::pow(static_cast<double>(pos++) + 1.0, -*decay_r);
    } else {
        const double val = 1.0 / static_cast<double>(index_set.size());
        for (Eigen::Index i : index_set) out[i - 1] = val;
    }
    return out;
}

/** Symmetric Dirichlet(c,..,c) draw via normalized Gamma(c,1) variates:
 *  nonnegative, unit l1 norm, expectation (1/d,..,1/d). */
inline Vector dirichlet_projection(Eigen::Index d, double concentration, std::uint64_t seed) {
    if (d < 1) throw std::invalid_argument("dirichlet_projection: d < 1");
    if (!(concentration > 0)) throw std::invalid_argument("dirichlet_projection: concentration must be positive");
    std::mt19937_64 rng(seed);
    std::gamma_distribution<double> gamma(concentration, 1.0);
    Vector out(d);
    double total = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        out[i] = gamma(rng);
        total += out[i];
    }
    if (total <= 0) return uniform_projection(d);
    return out / total;
}

}  // namespace covcusum

#endif

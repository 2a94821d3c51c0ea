#ifndef COVCUSUM_COMMON_HPP
#define COVCUSUM_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace covcusum {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/** Multivariate series, one row per time index, one column per coordinate. */
using Series = Eigen::MatrixXd;

/** splitmix64 finalizer; bijective 64-bit mix. */
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/** Derives an independent stream seed from a base seed and a tag sequence,
 *  so that replicate k of study cell (d, theta) is reproducible in isolation. */
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = mix64(base);
    for (std::uint64_t t : tags) s = mix64(s ^ t);
    return s;
}

/** Index (0-based) of the first occurrence of the maximum. */
template <typename Vec>
inline Eigen::Index smallest_argmax(const Vec& x) {
    if (x.size() == 0) throw std::invalid_argument("smallest_argmax: empty input");
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < x.size(); ++i)
        if (x[i] > x[best]) best = i;
    return best;
}

inline long round_half_up(double x) { return static_cast<long>(std::floor(x + 0.5)); }

/** floor(n*u) guarded against representation error when u = k/n exactly. */
inline Eigen::Index floor_frac_count(Eigen::Index n, double u) {
    return static_cast<Eigen::Index>(std::floor(static_cast<double>(n) * u + 1e-9));
}

}  // namespace covcusum

#endif

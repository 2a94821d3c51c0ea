#ifndef COVCUSUM_SEGMENTATION_HPP
#define COVCUSUM_SEGMENTATION_HPP

#include <algorithm>
#include <string>
#include <vector>

#include "covcusum/common.hpp"
#include "covcusum/testing.hpp"

namespace covcusum {

struct SegmentationResult {
    std::vector<Eigen::Index> change_points;  // global 1-based, sorted
    std::vector<TestReport> segment_reports;
    int depth_reached = 0;
    std::vector<std::string> warnings;
};

struct SegmentationOptions {
    WeightFunction g;
    double level = 0.05;
    double quantile = 0.0;  // 0 resolves to the Kolmogorov quantile for g = 1
    LrvMode mode = LrvMode::full;
    const Series* learning = nullptr;
    Eigen::Index min_segment = 0;  // 0 resolves to 2m + 2 at the root kernel
    int max_depth = 6;
};

namespace detail {

struct SegmentationState {
    const Series& series;
    const Vector& v;
    const Vector& w;
    const SegmentationOptions& opt;
    double quantile;
    Eigen::Index min_segment;
    SegmentationResult out;
};

inline void segment_recurse(SegmentationState& st, Eigen::Index lo, Eigen::Index hi, int depth) {
    st.out.depth_reached = std::max(st.out.depth_reached, depth);
    const Eigen::Index len = hi - lo + 1;
    if (len < st.min_segment || depth > st.opt.max_depth) return;
    Series seg = st.series.middleRows(lo - 1, len);
    TestReport r;
    try {
        r = run_test(seg, st.v, st.w, st.opt.g, st.opt.level, st.quantile, st.opt.mode, st.opt.learning);
    } catch (const std::exception& e) {
        st.out.warnings.push_back("segment [" + std::to_string(lo) + "," + std::to_string(hi) +
                                  "] skipped: " + std::string(e.what()));
        return;
    }
    if (!r.warnings.empty()) {
        st.out.warnings.push_back("segment [" + std::to_string(lo) + "," + std::to_string(hi) +
                                  "] skipped: " + r.warnings.front());
        return;
    }
    r.settings["segment"] = std::to_string(lo) + ".." + std::to_string(hi);
    st.out.segment_reports.push_back(r);
    if (!r.decision) return;
    const Eigen::Index cut = r.tau_hat;  // local, 1..len-1
    if (cut < st.min_segment || len - cut < st.min_segment) return;
    st.out.change_points.push_back(lo - 1 + cut);
    segment_recurse(st, lo, lo - 1 + cut, depth + 1);
    segment_recurse(st, lo + cut, hi, depth + 1);
}

}  // namespace detail

/** Iterative binary segmentation: test the segment, split at tau_hat on
 *  rejection, recurse on both halves. The same fixed-level quantile is reused
 *  at every depth (no multiplicity correction); splits closer than
 *  min_segment to a boundary are not accepted. */
inline SegmentationResult binary_segmentation(const Series& series, const Vector& v, const Vector& w,
                                              const SegmentationOptions& options) {
    const Eigen::Index n = series.rows();
    if (n < 2) throw std::invalid_argument("binary_segmentation: n < 2");
    if (options.max_depth < 1) throw std::invalid_argument("binary_segmentation: max_depth < 1");
    const Eigen::Index root_m = KernelSpec::default_for(n).m;
    Eigen::Index min_segment = options.min_segment > 0 ? options.min_segment : 2 * root_m + 2;
    if (min_segment < 2 * root_m + 2)
        throw std::invalid_argument("binary_segmentation: min_segment must be at least 2m + 2");
    double quantile = options.quantile;
    if (quantile <= 0.0) {
        if (!options.g.is_unweighted())
            throw std::invalid_argument("binary_segmentation: weighted tests need an explicit quantile");
        quantile = kolmogorov_quantile(1.0 - options.level);
    }
    detail::SegmentationState st{series, v, w, options, quantile, min_segment, {}};
    detail::segment_recurse(st, 1, n, 1);
    std::sort(st.out.change_points.begin(), st.out.change_points.end());
    return st.out;
}

}  // namespace covcusum

#endif

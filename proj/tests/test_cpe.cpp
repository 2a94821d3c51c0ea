#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "covcusum/cpe.hpp"
#include "covcusum/linproc.hpp"
#include "covcusum/projections.hpp"

using namespace covcusum;

TEST(EstimateTau, StepSeriesLocatesTheBreak) {
    Series y = Series::Zero(100, 1);
    y.topRows(30).setConstant(10.0);
    Vector one = Vector::Ones(1);
    EXPECT_EQ(estimate_tau(y, one, one, WeightFunction::unweighted()), 30);
}

TEST(EstimateTau, ExactTieResolvesToSmallestIndex) {
    // Dyadic length keeps the trajectory values exact, so k = 16 and k = 48
    // attain the identical maximum and the smaller index must win.
    Series y = Series::Zero(64, 1);
    y.topRows(16).setConstant(1.0);
    y.bottomRows(16).setConstant(1.0);
    Vector one = Vector::Ones(1);
    CusumResult r = cusum(y, one, one, WeightFunction::unweighted());
    EXPECT_DOUBLE_EQ(r.trajectory[15], r.trajectory[47]);
    EXPECT_DOUBLE_EQ(r.trajectory[15], 1.0);
    EXPECT_EQ(estimate_tau(y, one, one, WeightFunction::unweighted()), 16);
}

TEST(EstimateTau, AgreesWithCusumArgmaxAndCenteredFlag) {
    std::mt19937_64 rng(70);
    std::normal_distribution<double> normal(0.0, 1.0);
    Series y(80, 3);
    for (Eigen::Index i = 0; i < 80; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) y(i, j) = normal(rng);
    Vector v = uniform_projection(3);
    WeightFunction g = WeightFunction::power(0.2);
    EXPECT_EQ(estimate_tau(y, v, v, g), cusum(y, v, v, g).argmax_k);
    Series shifted = y.array() + 7.5;
    EXPECT_EQ(estimate_tau(shifted, v, v, g, true), estimate_tau(y, v, v, g, true));
}

TEST(StoppedRule, WorkedExamplesAndClamping) {
    EXPECT_EQ(stopped_rule(60, 100), 69);
    EXPECT_EQ(stopped_rule(10, 100), 25);  // floor n/4 binds
    EXPECT_EQ(stopped_rule(95, 100), 100);  // cap at n binds
    EXPECT_EQ(stopped_rule(100, 100), 100);
    EXPECT_EQ(stopped_rule(1, 8), 2);
    EXPECT_THROW(stopped_rule(0, 100), std::invalid_argument);
    EXPECT_THROW(stopped_rule(101, 100), std::invalid_argument);
    EXPECT_THROW(stopped_rule(5, 0), std::invalid_argument);
}

TEST(StoppedRule, RangeAndMonotonicity) {
    const Eigen::Index n = 200;
    Eigen::Index prev = 0;
    for (Eigen::Index tau = 1; tau <= n; ++tau) {
        Eigen::Index t = stopped_rule(tau, n);
        EXPECT_GE(t, n / 4);
        EXPECT_LE(t, n);
        EXPECT_GE(t, prev);
        EXPECT_GE(t, tau);  // never stops before the estimate
        prev = t;
    }
}

TEST(EstimateTau, MidSampleBreakRecoveredWithHighProbability) {
    const Eigen::Index n = 500, d = 10;
    ChangePointModel model = table1_model(n, d, 250);
    Vector v = uniform_projection(d);
    const int reps = 400;
    int hits = 0;
    for (int r = 0; r < reps; ++r) {
        Series y = simulate_change_model(model, {Distribution::gaussian, 1.0, 0.0, 71000 + static_cast<std::uint64_t>(r)});
        double frac = static_cast<double>(estimate_tau(y, v, v, WeightFunction::unweighted())) / static_cast<double>(n);
        if (std::abs(frac - 0.5) <= 0.05) ++hits;
    }
    EXPECT_GE(hits, static_cast<int>(0.90 * reps));
}

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "covcusum/projections.hpp"

using namespace covcusum;

TEST(Uniform, BasicShapes) {
    Vector v = uniform_projection(4);
    for (Eigen::Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(v[i], 0.25);
    EXPECT_DOUBLE_EQ(uniform_projection(1)[0], 1.0);
    for (Eigen::Index d : {2, 7, 100}) EXPECT_NEAR(uniform_projection(d).lpNorm<1>(), 1.0, 1e-15);
    EXPECT_THROW(uniform_projection(0), std::invalid_argument);
}

TEST(Block, GroupMeansAndDecay) {
    Vector v = block_projection(5, {4, 5});
    Vector expect(5);
    expect << 0, 0, 0, 0.5, 0.5;
    EXPECT_LT((v - expect).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((block_projection(3, {1, 2, 3}) - uniform_projection(3)).cwiseAbs().maxCoeff(), 1e-15);
    Vector decay = block_projection(3, {2, 3}, 2.0);
    EXPECT_DOUBLE_EQ(decay[0], 0.0);
    EXPECT_DOUBLE_EQ(decay[1], 0.25);
    EXPECT_NEAR(decay[2], 1.0 / 9.0, 1e-15);
    EXPECT_THROW(block_projection(3, {}), std::invalid_argument);
    EXPECT_THROW(block_projection(3, {0}), std::invalid_argument);
    EXPECT_THROW(block_projection(3, {4}), std::invalid_argument);
}

TEST(Dirichlet, SimplexAndDeterminism) {
    Vector v = dirichlet_projection(6, 1.0, 42);
    EXPECT_NEAR(v.sum(), 1.0, 1e-12);
    EXPECT_GE(v.minCoeff(), 0.0);
    EXPECT_EQ((v - dirichlet_projection(6, 1.0, 42)).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GT((v - dirichlet_projection(6, 1.0, 43)).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_DOUBLE_EQ(dirichlet_projection(1, 2.0, 9)[0], 1.0);
    EXPECT_THROW(dirichlet_projection(5, 0.0, 1), std::invalid_argument);
    EXPECT_THROW(dirichlet_projection(0, 1.0, 1), std::invalid_argument);
}

TEST(Dirichlet, MonteCarloMeanIsUniform) {
    const Eigen::Index d = 5;
    const int reps = 10000;
    Vector mean = Vector::Zero(d);
    for (int r = 0; r < reps; ++r) mean += dirichlet_projection(d, 1.0, 1000 + static_cast<std::uint64_t>(r));
    mean /= static_cast<double>(reps);
    // Var of a Dirichlet(1,..,1) entry is (d-1)/(d^2 (d+1)).
    double se = std::sqrt((d - 1.0) / (d * d * (d + 1.0)) / reps);
    for (Eigen::Index i = 0; i < d; ++i) EXPECT_NEAR(mean[i], 1.0 / static_cast<double>(d), 3.0 * se);
}

TEST(ProjectionPair, InvariantsEnforced) {
    ProjectionPair p(uniform_projection(3), Vector::Ones(3));
    EXPECT_NEAR(p.v_l1, 1.0, 1e-15);
    EXPECT_NEAR(p.w_l2, std::sqrt(3.0), 1e-15);
    EXPECT_THROW(ProjectionPair(Vector::Zero(3), Vector::Ones(3)), std::invalid_argument);
    EXPECT_THROW(ProjectionPair(Vector::Ones(2), Vector::Ones(3)), std::invalid_argument);
    Vector bad = Vector::Ones(2);
    bad[0] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(ProjectionPair(bad, Vector::Ones(2)), std::invalid_argument);
}

#include "gwsos/sdp.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace gwsos;

namespace {

Eigen::MatrixXd m2(double a, double b, double c, double d) {
    Eigen::MatrixXd M(2, 2);
    M << a, b, c, d;
    return M;
}

SdpProblem unit_disk_problem() {
    // minimize -x  s.t. [[1, x], [x, 1]] PSD
    SdpProblem p(1);
    p.objective()(0) = -1.0;
    SdpBlock b;
    b.dim = 2;
    b.constant = Eigen::MatrixXd::Identity(2, 2);
    b.terms.push_back({0, m2(0, 1, 1, 0)});
    p.add_block(b);
    return p;
}

}  // namespace

TEST(Sdp, AnalyticTwoByTwo) {
    auto sol = solve(unit_disk_problem());
    ASSERT_EQ(sol.status, SdpStatus::optimal) << sol.message;
    EXPECT_NEAR(sol.x(0), 1.0, 1e-6);
    EXPECT_NEAR(sol.objective_value, -1.0, 1e-6);
    EXPECT_GE(sol.min_eigenvalue, -1e-7);
}

TEST(Sdp, Deterministic) {
    auto p = unit_disk_problem();
    auto a = solve(p), b = solve(p);
    EXPECT_EQ(a.status, b.status);
    EXPECT_LE(std::abs(a.objective_value - b.objective_value), 1e-12);
    EXPECT_LE((a.x - b.x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Sdp, NonnegativityWithEquality) {
    // minimize x  s.t. x + s = 1, x >= 0, s >= 0 as 1x1 blocks
    SdpProblem p(2);
    p.objective()(0) = 1.0;
    p.add_equality({{{0, 1.0}, {1, 1.0}}, 1.0});
    for (int v = 0; v < 2; ++v) {
        SdpBlock b;
        b.dim = 1;
        b.constant = Eigen::MatrixXd::Zero(1, 1);
        b.terms.push_back({v, Eigen::MatrixXd::Ones(1, 1)});
        p.add_block(b);
    }
    auto sol = solve(p);
    ASSERT_EQ(sol.status, SdpStatus::optimal) << sol.message;
    EXPECT_NEAR(sol.x(0), 0.0, 1e-6);
    EXPECT_NEAR(sol.x(1), 1.0, 1e-6);
    EXPECT_LE(sol.equality_residual, 1e-7);
}

TEST(Sdp, RejectsAsymmetricCoefficient) {
    SdpProblem p(1);
    SdpBlock b;
    b.dim = 2;
    b.terms.push_back({0, m2(0, 1, 0, 0)});
    EXPECT_THROW(p.add_block(b), std::invalid_argument);
}

TEST(Sdp, InconsistentEqualitiesFlagged) {
    SdpProblem p(1);
    p.add_equality({{{0, 1.0}}, 1.0});
    p.add_equality({{{0, 2.0}}, 1.0});
    auto sol = solve(p);
    EXPECT_EQ(sol.status, SdpStatus::infeasible_suspected);
}

TEST(Sdp, InfeasibleBlockFlagged) {
    // x = 2 and [[1, x],[x, 1]] PSD cannot both hold
    auto p = unit_disk_problem();
    p.add_equality({{{0, 1.0}}, 2.0});
    auto sol = solve(p);
    EXPECT_NE(sol.status, SdpStatus::optimal);
}

// Weak-duality sanity: optimum <= objective at an independently built feasible point.
TEST(Sdp, RandomProblemBelowKnownFeasiblePoint) {
    std::mt19937 rng(21);
    std::normal_distribution<double> g(0, 1);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 5, k = 4;
        Eigen::VectorXd xf(n);
        for (int i = 0; i < n; ++i) xf(i) = g(rng);
        SdpProblem p(n);
        for (int i = 0; i < n; ++i) p.objective()(i) = g(rng);
        for (int blk = 0; blk < 2; ++blk) {
            SdpBlock b;
            b.dim = k;
            Eigen::MatrixXd value = Eigen::MatrixXd::Identity(k, k);
            for (int i = 0; i < n; ++i) {
                Eigen::MatrixXd F(k, k);
                for (int r = 0; r < k; ++r)
                    for (int c = 0; c < k; ++c) F(r, c) = g(rng);
                F = 0.5 * (F + F.transpose()).eval();
                b.terms.push_back({i, F});
                value -= xf(i) * F;
            }
            b.constant = value;  // block equals I at xf
            p.add_block(b);
        }
        // bounded: box |x_i| <= 10 via 1x1 blocks
        for (int i = 0; i < n; ++i)
            for (double s : {1.0, -1.0}) {
                SdpBlock b;
                b.dim = 1;
                b.constant = Eigen::MatrixXd::Constant(1, 1, 10.0);
                b.terms.push_back({i, Eigen::MatrixXd::Constant(1, 1, s)});
                p.add_block(b);
            }
        p.add_equality({{{0, 1.0}}, xf(0)});
        auto sol = solve(p);
        ASSERT_EQ(sol.status, SdpStatus::optimal) << sol.message;
        EXPECT_LE(sol.objective_value, p.objective_at(xf) + 1e-7);
        EXPECT_GE(sol.min_eigenvalue, -1e-7);
        EXPECT_LE(sol.equality_residual, 1e-7);
    }
}

TEST(Sdp, DumpContainsStructure) {
    auto j = unit_disk_problem().to_json();
    EXPECT_EQ(j["nvars"], 1);
    EXPECT_EQ(j["blocks"].size(), 1u);
    EXPECT_EQ(j["blocks"][0]["terms"][0]["var"], 0);
}

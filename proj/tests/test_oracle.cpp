#include "gwsos/oracle.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace gwsos;
using gwsos::testing::random_space;
using gwsos::testing::two_point;

namespace {

// Objective along pi = [[t, 1/2 - t], [1/2 - t, t]] for dist 1 vs 0.5, p = q = 1, expanded by hand.
double segment_value(double t) { return 2 * t - 4 * t * t + 0.25; }

// Straight four-loop, no shared code with the library evaluator.
double naive_objective(const Coupling& pi, const MetricMeasureSpace& X, const MetricMeasureSpace& Y, double p,
                       double q) {
    double s = 0;
    for (int i = 0; i < X.size(); ++i)
        for (int j = 0; j < Y.size(); ++j)
            for (int k = 0; k < X.size(); ++k)
                for (int l = 0; l < Y.size(); ++l)
                    s += std::pow(std::abs(std::pow(X.dist(i, k), q) - std::pow(Y.dist(j, l), q)), p) * pi(i, j) *
                         pi(k, l);
    return s;
}

}  // namespace

TEST(Evaluate, Examples) {
    auto X = two_point(1.0), Y = two_point(0.5);
    auto c = build_cost_tensor(X, Y, 1, 1);
    Coupling prod = product_coupling(X.weights, Y.weights);
    EXPECT_NEAR(evaluate_objective(prod, c), 0.5, 1e-15);
    EXPECT_NEAR(evaluate_objective(prod, c), segment_value(0.25), 1e-15);

    auto cxx = build_cost_tensor(X, X, 1, 1);
    Coupling diag = Eigen::Matrix2d::Identity() * 0.5;
    EXPECT_EQ(evaluate_objective(diag, cxx), 0.0);

    CostTensor zero = c;
    std::fill(zero.entries.begin(), zero.entries.end(), 0.0);
    EXPECT_EQ(evaluate_objective(prod, zero), 0.0);
    EXPECT_THROW(evaluate_objective(Coupling::Zero(3, 2), c), InputError);
}

TEST(Evaluate, MatchesNaiveLoopAndSwapSymmetry) {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        auto X = random_space(3, rng), Y = random_space(2, rng);
        Coupling pi = product_coupling(X.weights, Y.weights);
        for (double p : {1.0, 2.0})
            for (double q : {1.0, 2.0}) {
                auto c = build_cost_tensor(X, Y, p, q);
                auto ct = build_cost_tensor(Y, X, p, q);
                const double v = evaluate_objective(pi, c);
                EXPECT_NEAR(v, naive_objective(pi, X, Y, p, q), 1e-12);
                EXPECT_NEAR(v, evaluate_objective(pi.transpose(), ct), 1e-12);
            }
    }
}

TEST(Projection, LandsOnCouplings) {
    std::mt19937 rng(3);
    std::normal_distribution<double> g(0, 1);
    Eigen::Vector3d mu(0.2, 0.5, 0.3);
    Eigen::Vector4d nu(0.1, 0.2, 0.3, 0.4);
    for (int trial = 0; trial < 20; ++trial) {
        Coupling v(3, 4);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 4; ++j) v(i, j) = g(rng);
        Coupling pi = project_to_couplings(v, mu, nu);
        EXPECT_LT(coupling_marginal_error(pi, mu, nu), 1e-10);
        EXPECT_GE(pi.minCoeff(), 0.0);
        // Projection is idempotent.
        EXPECT_LT((project_to_couplings(pi, mu, nu) - pi).cwiseAbs().maxCoeff(), 1e-10);
    }
    Coupling prod = product_coupling(mu, nu);
    EXPECT_LT((project_to_couplings(prod, mu, nu) - prod).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BruteForce, TwoPointExact) {
    auto r = brute_force_gw(two_point(1.0), two_point(0.5), 1, 1);
    EXPECT_EQ(r.method, OracleMethod::exact_1d);
    EXPECT_TRUE(r.exact);
    EXPECT_NEAR(r.value, 0.25, 1e-12);
    // Both endpoints t = 0 and t = 1/2 reach 0.25; the lexicographic tie-break picks t = 0.
    EXPECT_NEAR(r.coupling(0, 0), 0.0, 1e-15);
    EXPECT_NEAR(r.coupling(0, 1), 0.5, 1e-15);
    EXPECT_LT(r.certificate, 1e-12);
    // Hand minimum of the concave segment function.
    EXPECT_NEAR(r.value, std::min(segment_value(0.0), segment_value(0.5)), 1e-15);
}

TEST(BruteForce, IdenticalSpacesGiveZero) {
    std::mt19937 rng(9);
    for (int n : {2, 3}) {
        auto X = random_space(n, rng);
        auto r = brute_force_gw(X, X, 1, 1);
        EXPECT_NEAR(r.value, 0.0, 1e-9);
        EXPECT_LT(coupling_marginal_error(r.coupling, X.weights, X.weights), 1e-10);
    }
    EXPECT_TRUE(brute_force_gw(two_point(0.7), two_point(0.7), 2, 1).exact);
}

TEST(BruteForce, ExactAndGridAgreeOnTwoByTwo) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    OracleOptions grid;
    grid.force_grid = true;
    for (int trial = 0; trial < 20; ++trial) {
        auto X = two_point(u(rng), u(rng)), Y = two_point(u(rng), u(rng));
        for (double p : {1.0, 2.0}) {
            auto a = brute_force_gw(X, Y, p, 1);
            auto b = brute_force_gw(X, Y, p, 1, grid);
            EXPECT_EQ(b.method, OracleMethod::grid_localsearch);
            EXPECT_FALSE(b.exact);
            EXPECT_NEAR(a.value, b.value, 1e-6);
        }
    }
}

TEST(BruteForce, ResultInvariants) {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 5; ++trial) {
        auto X = random_space(3, rng), Y = random_space(3, rng);
        auto r = brute_force_gw(X, Y, 1, 2);
        EXPECT_LT(coupling_marginal_error(r.coupling, X.weights, Y.weights), 1e-10);
        EXPECT_NEAR(r.value, evaluate_objective(r.coupling, build_cost_tensor(X, Y, 1, 2)), 1e-12);
        EXPECT_LE(r.value, evaluate_objective(product_coupling(X.weights, Y.weights), build_cost_tensor(X, Y, 1, 2)) + 1e-12);
        // Swap symmetry of the optimum.
        auto s = brute_force_gw(Y, X, 1, 2);
        EXPECT_NEAR(r.value, s.value, 1e-7);
    }
}

TEST(BruteForce, DeterministicAndJobIndependent) {
    std::mt19937 rng(21);
    auto X = random_space(3, rng), Y = random_space(3, rng);
    auto a = brute_force_gw(X, Y, 1, 1);
    auto b = brute_force_gw(X, Y, 1, 1);
    OracleOptions par;
    par.jobs = 4;
    auto c = brute_force_gw(X, Y, 1, 1, par);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.coupling, b.coupling);
    EXPECT_EQ(a.value, c.value);
    EXPECT_EQ(a.coupling, c.coupling);
}

TEST(BruteForce, SizeCap) {
    std::mt19937 rng(1);
    auto X = random_space(5, rng), Y = random_space(4, rng);
    EXPECT_THROW(brute_force_gw(X, Y, 1, 1), InputError);
}

#include "gwsos/oracle.hpp"
#include "gwsos/sampling.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gwsos;
using gwsos::testing::two_point;

namespace {

MetricMeasureSpace grid_space(int n) {
    Eigen::MatrixXd D(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) D(i, j) = std::abs(i - j) / double(n - 1);
    return make_space(D, Eigen::VectorXd::Constant(n, 1.0 / n));
}

// Exact minimum number of closed eps-balls centred at points covering all points, by subset search.
int covering_number(const Eigen::MatrixXd& D, double eps) {
    const int n = static_cast<int>(D.rows());
    int best = n;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        const int size = __builtin_popcount(mask);
        if (size >= best) continue;
        bool covered = true;
        for (int i = 0; i < n && covered; ++i) {
            bool hit = false;
            for (int c = 0; c < n && !hit; ++c)
                if ((mask >> c & 1u) && D(i, c) <= eps + 1e-12) hit = true;
            covered = hit;
        }
        if (covered) best = size;
    }
    return best;
}

}  // namespace

TEST(Ground, DistancesAndValidation) {
    auto circ = GroundDistribution::circle();
    EXPECT_NEAR(circ.distance(0.0, 0.5), 1.0, 1e-15);
    EXPECT_NEAR(circ.distance(0.1, 0.9), 0.4, 1e-15);
    auto iv = GroundDistribution::interval();
    EXPECT_NEAR(iv.distance(0.2, 0.7), 0.5, 1e-15);
    EXPECT_THROW(validate_ground(GroundDistribution::interval(0.5, 0.2)), InputError);
    EXPECT_THROW(validate_ground(GroundDistribution::finite(two_point(2.0))), InputError);
    EXPECT_THROW(validate_ground(GroundDistribution::mixture({iv, circ}, {0.5, 0.5})), InputError);
    EXPECT_THROW(validate_ground(GroundDistribution::mixture({iv}, {0.5, 0.5})), InputError);
    EXPECT_NO_THROW(validate_ground(GroundDistribution::mixture({iv, GroundDistribution::interval(0, 0.5)}, {1, 2})));
}

TEST(Ground, JsonRoundtrip) {
    auto mix = GroundDistribution::mixture({GroundDistribution::interval(0, 0.5), GroundDistribution::interval(0.5, 1)},
                                           {0.25, 0.75});
    auto back = ground_from_json(ground_to_json(mix));
    EXPECT_EQ(back.kind, GroundKind::mixture);
    ASSERT_EQ(back.components.size(), 2u);
    EXPECT_EQ(back.components[1].lo, 0.5);
    auto fin = ground_from_json(ground_to_json(GroundDistribution::finite(grid_space(4))));
    EXPECT_EQ(fin.space.dist, grid_space(4).dist);
    EXPECT_THROW(ground_from_json(nlohmann::json::parse(R"({"kind":"sphere"})")), InputError);
}

TEST(Discretize, IntervalCircleFinite) {
    auto d = discretize(GroundDistribution::interval(), 64);
    ASSERT_EQ(d.space.size(), 64);
    EXPECT_NEAR(d.space.diameter(), 1.0, 1e-15);
    EXPECT_NEAR(d.space.weights(0), 0.5 / 63, 1e-15);
    EXPECT_NEAR(d.space.weights(10), 1.0 / 63, 1e-15);

    auto half = discretize(GroundDistribution::interval(0, 0.5), 3);  // grid {0, 0.5, 1}
    EXPECT_NEAR(half.space.weights(0), 0.5, 1e-15);
    EXPECT_NEAR(half.space.weights(1), 0.5, 1e-15);
    EXPECT_NEAR(half.space.weights(2), 0.0, 1e-15);

    auto c = discretize(GroundDistribution::circle(), 8);
    EXPECT_NEAR(c.space.dist(0, 4), 1.0, 1e-15);
    EXPECT_NEAR(c.space.weights(3), 0.125, 1e-15);

    auto f = discretize(GroundDistribution::finite(grid_space(4)));
    EXPECT_EQ(f.space.dist, grid_space(4).dist);
}

TEST(Empirical, Examples) {
    auto fin = GroundDistribution::finite(grid_space(4));
    auto one = sample_empirical(fin, 1, 3);
    ASSERT_EQ(one.size(), 1);
    EXPECT_EQ(one.weights(0), 1.0);

    auto a = sample_empirical(GroundDistribution::interval(), 4, 42);
    auto b = sample_empirical(GroundDistribution::interval(), 4, 42);
    EXPECT_EQ(a.dist, b.dist);
    EXPECT_EQ(a.weights, b.weights);
    ASSERT_EQ(a.size(), 4);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(a.weights(i), 0.25);

    auto draws = draw_points(fin, 50, 5);
    auto emp = empirical_measure(fin, draws);
    EXPECT_NEAR(emp.space.weights.sum(), 1.0, 1e-15);
    for (std::size_t k = 0; k < emp.coords.size(); ++k) {
        const double cnt = std::count(draws.begin(), draws.end(), emp.coords[k]);
        EXPECT_DOUBLE_EQ(emp.space.weights(static_cast<int>(k)), cnt / 50.0);
    }
    EXPECT_THROW(draw_points(fin, 0, 1), InputError);
}

TEST(Dyadic, Examples) {
    Eigen::MatrixXd single = Eigen::MatrixXd::Zero(1, 1);
    auto p1 = build_dyadic_partition(single, 3);
    EXPECT_EQ(p1.counts(), (std::vector<int>{1, 1, 1}));

    Eigen::MatrixXd two(2, 2);
    two << 0, 1, 1, 0;
    EXPECT_EQ(build_dyadic_partition(two, 1).counts(), std::vector<int>{2});

    auto g = grid_space(16);
    auto p = build_dyadic_partition(g.dist, 2);
    EXPECT_NO_THROW(validate_dyadic_partition(p, g.dist));
    EXPECT_EQ(p.counts(), (std::vector<int>{3, 8}));
    for (int k = 1; k <= 2; ++k) EXPECT_LE(p.counts()[k - 1], covering_number(g.dist, std::pow(3.0, -(k + 1))));

    auto deep = build_dyadic_partition(two, 100000);
    EXPECT_FALSE(deep.warnings.empty());
    EXPECT_LT(deep.k_star(), 100000);
}

TEST(Dyadic, RandomInvariants) {
    std::mt19937 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        auto X = gwsos::testing::random_space(20, rng);
        auto p = build_dyadic_partition(X.dist, 4);
        EXPECT_NO_THROW(validate_dyadic_partition(p, X.dist));
    }
    auto X = grid_space(4);
    auto p = build_dyadic_partition(X.dist, 2);
    p.levels[1][0].push_back(3);
    EXPECT_THROW(validate_dyadic_partition(p, X.dist), InputError);
}

TEST(Transport, Examples) {
    auto g = grid_space(16);
    auto part = build_dyadic_partition(g.dist, 2);
    EXPECT_NEAR(transport_upper_bound(g.weights, g.weights, part, 1, 1), 1.0 / 9.0, 1e-15);
    EXPECT_NEAR(transport_upper_bound(g.weights, g.weights, part, 2, 1), 1.0 / 81.0, 1e-15);

    // Two Diracs at distance 1.
    Eigen::MatrixXd two(2, 2);
    two << 0, 1, 1, 0;
    auto p2 = build_dyadic_partition(two, 1);
    const double bound = transport_upper_bound(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), p2, 1, 1);
    Eigen::MatrixXd D0 = Eigen::MatrixXd::Zero(1, 1);
    auto pt = make_space(D0, Eigen::VectorXd::Ones(1));
    EXPECT_GE(bound, brute_force_gw(pt, pt, 1, 1).value);
    EXPECT_NEAR(bound, 3.0 * 2.0 + 1.0 / 3.0, 1e-15);

    EXPECT_THROW(transport_upper_bound(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 0.5), p2, 1, 1), InputError);
}

TEST(Transport, HandSetDiscrepancies) {
    // 9 points spread so that level 1 has cells {0,1,2},{3,4,5},{6,7,8} and level 2 singletons.
    const int n = 9;
    Eigen::MatrixXd D(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) D(i, j) = i == j ? 0.0 : (i / 3 == j / 3 ? 0.2 : 0.9);
    auto part = build_dyadic_partition(D, 2);
    ASSERT_EQ(part.counts(), (std::vector<int>{3, 9}));
    Eigen::VectorXd lam(n), mu(n);
    lam << 0.2, 0.1, 0.0, 0.1, 0.1, 0.1, 0.1, 0.2, 0.1;
    mu << 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.2;
    // level 1: |0.3-0.3| + |0.3-0.3| + |0.4-0.4| = 0; level 2: 0.1+0+0.1+0+0+0+0+0.1+0.1 = 0.4
    const auto disc = level_discrepancies(lam, mu, part);
    EXPECT_NEAR(disc[0], 0.0, 1e-15);
    EXPECT_NEAR(disc[1], 0.4, 1e-15);
    // 3 * 1 * (h(1) * 0 + h(1/3) * 0.4) + h(1/9) * 1 = 0.4 + 1/9
    EXPECT_NEAR(transport_upper_bound(lam, mu, part, 1, 1), 0.4 + 1.0 / 9.0, 1e-15);
}

TEST(Transport, DominatesOracleOnGroundSubsets) {
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    auto g = grid_space(6);
    auto part = build_dyadic_partition(g.dist, 3);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd a(6), b(6);
        for (int i = 0; i < 6; ++i) a(i) = i < 3 ? u(rng) : 0.0, b(i) = i >= 2 ? u(rng) : 0.0;
        a /= a.sum();
        b /= b.sum();
        auto sub = [&](const Eigen::VectorXd& w, int lo, int hi) {
            Eigen::MatrixXd D = g.dist.block(lo, lo, hi - lo, hi - lo);
            return make_space(D, w.segment(lo, hi - lo));
        };
        const double gw = brute_force_gw(sub(a, 0, 3), sub(b, 2, 6), 1, 1).value;
        EXPECT_GE(transport_upper_bound(a, b, part, 1, 1), gw - 1e-8);
    }
}

TEST(Rate, WorkedExample) {
    const double c1 = 27 + 27 / (std::sqrt(3.0) - 1) + std::pow(3.0, 10), c2 = 1.5 * std::pow(3.0, 1.5);
    auto c = rate_constants(1, 1, 3, 1);
    EXPECT_NEAR(c.alpha, 3.0, 1e-15);
    EXPECT_NEAR(c.c1, c1, 1e-9);
    EXPECT_NEAR(c.c2, c2, 1e-12);
    EXPECT_NEAR(rate_bound(1, 1, 1, 3, 1), c1 + 1.5 + c2, 1e-9);
    // Leading term scaling: n -> 4n multiplies C1 n^{-1/3} by 4^{-1/3}.
    const double lead1 = rate_bound(5, 1, 1, 3, 1) - 1.5 * std::pow(5.0, -1.0 / 3) - c2 / std::sqrt(5.0);
    const double lead4 = rate_bound(20, 1, 1, 3, 1) - 1.5 * std::pow(20.0, -1.0 / 3) - c2 / std::sqrt(20.0);
    EXPECT_NEAR(lead4 / lead1, std::pow(4.0, -1.0 / 3), 1e-12);
}

TEST(Rate, Domain) {
    EXPECT_THROW(rate_bound(1, 1, 1, 2, 1), InputError);  // s = 2p
    try {
        rate_bound(1, 1, 2, 3, 1);  // s = 3 < 2pq = 4
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("2pq"), std::string::npos);
    }
    EXPECT_THROW(rate_bound(1, 1, 1, 3, 1.5), InputError);
    EXPECT_THROW(rate_bound(0, 1, 1, 3, 1), InputError);
    EXPECT_NEAR(deviation_bound(1.0, 4, 16), 0.5, 1e-15);
}

TEST(Experiment, FiniteGroundSmall) {
    ExperimentConfig cfg;
    cfg.ground = GroundDistribution::finite(grid_space(3));
    cfg.n_values = {3, 12};
    cfg.trials = 3;
    cfg.seed = 9;
    auto a = consistency_experiment(cfg);
    cfg.jobs = 3;
    auto b = consistency_experiment(cfg);
    ASSERT_EQ(a.rows.size(), 2u);
    EXPECT_EQ(rate_report_to_json(a).dump(), rate_report_to_json(b).dump());
    EXPECT_TRUE(a.failures.empty());
    EXPECT_TRUE(a.bound_in_domain);
    for (const auto& row : a.rows) {
        EXPECT_EQ(row.trials_ok, 3);
        EXPECT_LE(row.mean, row.transport_mean + 1e-6);
        EXPECT_LE(row.mean, row.bound);
        ASSERT_EQ(row.discrepancy_mean.size(), 2u);
    }
    EXPECT_NE(rate_report_table(a).find("transport_bound"), std::string::npos);
}

TEST(Experiment, ConfigParsing) {
    auto doc = nlohmann::json::parse(R"({"ground":{"kind":"unit_circle_uniform"},"n":[2,4],"trials":2,"seed":3,"colour":1})");
    std::vector<std::string> warn;
    auto cfg = experiment_from_json(doc, &warn);
    EXPECT_EQ(cfg.n_values, (std::vector<int>{2, 4}));
    EXPECT_EQ(cfg.seed, 3u);
    ASSERT_EQ(warn.size(), 1u);
    EXPECT_THROW(experiment_from_json(nlohmann::json::parse(R"({"n":[2]})")), InputError);
    EXPECT_THROW(experiment_from_json(nlohmann::json::parse(R"({"ground":{"kind":"unit_circle_uniform"},"n":[]})")),
                 InputError);
}

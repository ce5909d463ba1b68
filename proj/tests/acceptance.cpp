// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any criterion fails.
#include "gwsos/geometry.hpp"
#include "gwsos/hierarchy.hpp"
#include "gwsos/oracle.hpp"
#include "gwsos/parallel.hpp"
#include "gwsos/sampling.hpp"
#include "gwsos/sdp.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

using namespace gwsos;
using gwsos::testing::random_space;
using gwsos::testing::two_point;

namespace {

constexpr int kInstances = 52;
constexpr double kSoundTol = 1e-5;
constexpr double kOracleExactTol = 1e-8;
constexpr double kBoundTol = 1e-6;
constexpr double kMonotoneTol = 1e-6;
constexpr double kIdentityTol = 1e-4;
constexpr int kIdentitySpaces = 24;
constexpr double kTriangleTol = 1e-4;
constexpr int kTriangleSpaces = 6;  // 6 * 5 * 4 = 120 ordered triples
constexpr double kRoundtripTol = 1e-8;
constexpr double kGlueCheckTol = 1e-6;
constexpr double kGlueMarginalTol = 1e-9;
constexpr int kGlueTriples = 12;
constexpr double kConcentrationSlack = 1e-4;
constexpr double kTransportTol = 1e-8;
constexpr double kSdpTol = 1e-6;
constexpr double kDeterminismTol = 1e-12;

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
    std::printf("%s %2d %-28s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

struct Instance {
    MetricMeasureSpace X, Y;
    double p = 1, q = 1;
    double oracle = 0;
    LowerBound lb[2];
};

std::vector<Instance> make_instances(int jobs) {
    std::mt19937 rng(20240601);
    std::uniform_int_distribution<int> size(2, 3), expo(1, 2);
    std::vector<Instance> inst(kInstances);
    for (auto& in : inst) {
        in.X = random_space(size(rng), rng);
        in.Y = random_space(size(rng), rng);
        in.p = expo(rng);
        in.q = expo(rng);
    }
    parallel_for(inst.size(), jobs, [&](std::size_t k) {
        auto& in = inst[k];
        in.oracle = brute_force_gw(in.X, in.Y, in.p, in.q).value;
        for (int r = 1; r <= 2; ++r) in.lb[r - 1] = gw_lower_bound(in.X, in.Y, r, in.p, in.q);
    });
    return inst;
}

bool optimal(const LowerBound& lb) { return lb.solution.status == SdpStatus::optimal; }

void soundness(const std::vector<Instance>& inst) {
    double worst = -1e300;
    int bad = 0;
    for (const auto& in : inst)
        for (const auto& lb : in.lb) {
            if (!optimal(lb)) ++bad;
            worst = std::max(worst, lb.value - in.oracle);
        }
    report(1, "lower-bound soundness", bad == 0 && worst <= kSoundTol,
           fmt("max(gw_r - oracle) = %.3e over %.0f solves, non-optimal %.0f", worst, 2.0 * inst.size(), bad));
}

void two_point_exact() {
    const auto X = two_point(1.0), Y = two_point(0.5);
    const auto orc = brute_force_gw(X, Y, 1, 1);
    const double r1 = gw_lower_bound(X, Y, 1, 1, 1).value, r2 = gw_lower_bound(X, Y, 2, 1, 1).value;
    const bool ok = orc.exact && std::abs(orc.value - 0.25) <= kOracleExactTol && r1 <= 0.25 + kBoundTol &&
                    r2 >= r1 - kBoundTol && r2 <= 0.25 + kBoundTol;
    report(2, "exact 2x2 agreement", ok, fmt("oracle %.12f, r1 %.9f, r2 %.9f", orc.value, r1, r2));
}

void monotone(const std::vector<Instance>& inst) {
    double worst = -1e300;
    for (const auto& in : inst) worst = std::max(worst, in.lb[0].value - in.lb[1].value);
    report(3, "hierarchy monotonicity", worst <= kMonotoneTol, fmt("max(gw_1 - gw_2) = %.3e", worst));
}

void identity(int jobs) {
    std::mt19937 rng(7001);
    std::vector<MetricMeasureSpace> spaces;
    for (int k = 0; k < kIdentitySpaces; ++k) spaces.push_back(random_space(2 + k % 2, rng));
    std::vector<double> delta(spaces.size());
    parallel_for(spaces.size(), jobs, [&](std::size_t k) { delta[k] = gw_lower_bound(spaces[k], spaces[k], 1, 1, 1).delta; });
    const double worst = *std::max_element(delta.begin(), delta.end());
    report(4, "identity axiom", worst <= kIdentityTol, fmt("max delta(X, X) = %.3e over %.0f spaces", worst, delta.size()));
}

void triangle(int jobs) {
    std::mt19937 rng(7002);
    std::vector<MetricMeasureSpace> spaces;
    for (int k = 0; k < kTriangleSpaces; ++k) spaces.push_back(random_space(2 + (k * 5 + 1) % 2, rng));
    PseudoMetricOptions o;
    o.triangle_tol = kTriangleTol;
    o.jobs = jobs;
    const auto rep = pseudo_metric_check(spaces, 1, 1, 1, o);
    report(5, "triangle inequality", rep.triangle && rep.solver_issues.empty() && rep.triples >= 30,
           fmt("max violation %.3e over %.0f triples", rep.triangle_worst, rep.triples));
}

void roundtrip(const std::vector<Instance>& inst) {
    double worst = 0, check = 0;
    int bad = 0, used = 0;
    for (const auto& in : inst) {
        const auto& lb = in.lb[0];
        if (!optimal(lb)) continue;
        ++used;
        const auto P = moments_to_tensor_measure(lb.y, 1, in.X.size(), in.Y.size());
        const auto back = tensor_measure_to_moments(P);
        worst = std::max(worst, (back.values - lb.y.values).cwiseAbs().maxCoeff());
        const auto chk = check_tensor_measure(P, in.X.weights, in.Y.weights);
        check = std::max(check, chk.worst());
        if (!chk.passed()) ++bad;
    }
    report(6, "moments-measures roundtrip", used == static_cast<int>(inst.size()) && worst <= kRoundtripTol && bad == 0,
           fmt("max |y' - y| = %.3e, worst check %.3e, failed checks %.0f", worst, check, bad));
}

void gluing(int jobs) {
    std::mt19937 rng(7003);
    std::uniform_int_distribution<int> size(2, 3);
    struct Triple {
        MetricMeasureSpace X, Y, Z;
        double marg = 0, check = 0;
        bool solved = false;
    };
    std::vector<Triple> t(kGlueTriples);
    for (auto& tr : t) {
        tr.X = random_space(size(rng), rng);
        tr.Y = random_space(size(rng), rng);
        tr.Z = random_space(size(rng), rng);
    }
    parallel_for(t.size(), jobs, [&](std::size_t k) {
        auto& tr = t[k];
        const auto lp = gw_lower_bound(tr.X, tr.Y, 1, 1, 1), lq = gw_lower_bound(tr.Y, tr.Z, 1, 1, 1);
        tr.solved = optimal(lp) && optimal(lq);
        const auto P = moments_to_tensor_measure(lp.y, 1, tr.X.size(), tr.Y.size());
        const auto Q = moments_to_tensor_measure(lq.y, 1, tr.Y.size(), tr.Z.size());
        const auto res = glue(P, Q, tr.Y.weights);
        tr.marg = std::max(res.xy_error, res.yz_error);
        tr.check = check_tensor_measure(res.R, tr.X.weights, tr.Z.weights).worst();
    });
    double marg = 0, check = 0;
    bool solved = true;
    for (const auto& tr : t) marg = std::max(marg, tr.marg), check = std::max(check, tr.check), solved = solved && tr.solved;
    report(7, "gluing", solved && marg <= kGlueMarginalTol && check <= kGlueCheckTol,
           fmt("max marginal error %.3e, worst R check %.3e over %.0f triples", marg, check, t.size()));
}

void concentration() {
    const int n = 16;
    Eigen::MatrixXd D(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) D(i, j) = std::abs(i - j) / 16.0;
    const auto X = make_space(D, Eigen::VectorXd::Constant(n, 1.0 / n), {}, "grid16");
    CellPartition part;
    for (int c = 0; c < 4; ++c) {
        part.cells.push_back({4 * c, 4 * c + 1, 4 * c + 2, 4 * c + 3});
        part.representatives.push_back(4 * c + 1);
    }
    part.radius = 0.125;
    validate_partition(part, X);
    const std::vector<double> pos{0.0, 0.3, 0.55, 1.0};
    Eigen::MatrixXd E(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) E(i, j) = std::abs(pos[i] - pos[j]);
    Eigen::VectorXd w(4);
    w << 0.1, 0.4, 0.3, 0.2;
    const auto Y = make_space(E, w, {}, "four");
    const auto fine = gw_lower_bound(X, Y, 1, 1, 1), coarse = gw_lower_bound(concentrate_space(X, part), Y, 1, 1, 1);
    const double diff = std::abs(fine.value - coarse.value), allowed = 4 * 1 * 1 * part.radius + kConcentrationSlack;
    report(8, "concentration stability", optimal(fine) && optimal(coarse) && diff <= allowed,
           fmt("|fine - coarse| = %.6f (fine %.6f), allowed %.4f", diff, fine.value, allowed));
}

// X and Y placed in one ground set at mutual distance 0.5.
void transport(const std::vector<Instance>& inst) {
    double worst = 1e300;
    for (const auto& in : inst) {
        const int m = in.X.size(), n = in.Y.size();
        Eigen::MatrixXd G = Eigen::MatrixXd::Constant(m + n, m + n, 0.5);
        G.topLeftCorner(m, m) = in.X.dist;
        G.bottomRightCorner(n, n) = in.Y.dist;
        Eigen::VectorXd a = Eigen::VectorXd::Zero(m + n), b = Eigen::VectorXd::Zero(m + n);
        a.head(m) = in.X.weights;
        b.tail(n) = in.Y.weights;
        const auto part = build_dyadic_partition(G, 3);
        worst = std::min(worst, transport_upper_bound(a, b, part, in.p, in.q) - in.oracle);
    }
    report(9, "transport upper bound", worst >= -kTransportTol, fmt("min(bound - oracle) = %.3e", worst));
}

void sampling(int jobs) {
    Eigen::MatrixXd D(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) D(i, j) = std::abs(i - j) / 3.0;
    ExperimentConfig cfg;
    cfg.ground = GroundDistribution::finite(make_space(D, Eigen::VectorXd::Constant(4, 0.25), {}, "line4"));
    cfg.r = 1;
    cfg.p = cfg.q = 1;
    cfg.trials = 20;
    cfg.n_values = {4, 16, 64};
    cfg.s = 3;
    cfg.seed = 1;
    cfg.jobs = jobs;
    const auto rep = consistency_experiment(cfg);
    std::string means;
    for (const auto& row : rep.rows) means += fmt(" n=%.0f:%.4f", row.n, row.mean);
    report(10, "sampling consistency trend",
           rep.failures.empty() && rep.monotone && rep.bound_in_domain && rep.below_bound,
           "means" + means + (rep.monotone ? ", monotone" : ", not monotone") +
               (rep.below_bound ? ", below rate bound" : ", above rate bound"));
}

SdpProblem unit_disk() {
    SdpProblem p(1);
    p.objective()(0) = -1.0;
    SdpBlock b;
    b.dim = 2;
    b.constant = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d F;
    F << 0, 1, 1, 0;
    b.terms.push_back({0, F});
    p.add_block(b);
    return p;
}

void sdp_suite() {
    const auto p = unit_disk();
    const auto a = solve(p), b = solve(p);
    const double err = std::abs(a.x(0) - 1.0), drift = (a.x - b.x).cwiseAbs().maxCoeff();
    report(11, "sdp solver", a.status == SdpStatus::optimal && err <= kSdpTol && drift <= kDeterminismTol &&
                                 std::abs(a.objective_value - b.objective_value) <= kDeterminismTol,
           fmt("|x - 1| = %.3e, repeat drift %.3e", err, drift));
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    const int jobs = default_jobs();
    const auto inst = make_instances(jobs);
    soundness(inst);
    two_point_exact();
    monotone(inst);
    identity(jobs);
    triangle(jobs);
    roundtrip(inst);
    gluing(jobs);
    concentration();
    transport(inst);
    sampling(jobs);
    sdp_suite();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d of 11 criteria failed (%.1f s)\n", failures, secs);
    return failures == 0 ? 0 : 1;
}

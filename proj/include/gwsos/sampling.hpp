#pragma once

#include "gwsos/hierarchy.hpp"
#include "gwsos/mmspace.hpp"

#include <json.hpp>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace gwsos {

enum class GroundKind { unit_interval_uniform, unit_circle_uniform, finite, mixture };
const char* to_string(GroundKind k);

// A samplable probability measure on a diameter-one ground set. Points are coordinates:
// a position in [0, 1] (interval), a turn fraction in [0, 1) (circle, geodesic metric scaled so
// antipodes are at distance 1), or an atom index (finite).
struct GroundDistribution {
    GroundKind kind = GroundKind::unit_interval_uniform;
    double lo = 0.0, hi = 1.0;  // interval support
    MetricMeasureSpace space;   // finite ground space and its weights
    std::vector<GroundDistribution> components;
    std::vector<double> mixture_weights;

    static GroundDistribution interval(double lo = 0.0, double hi = 1.0);
    static GroundDistribution circle();
    static GroundDistribution finite(const MetricMeasureSpace& space);
    static GroundDistribution mixture(std::vector<GroundDistribution> components, std::vector<double> weights);

    // Kind of the underlying set (a mixture reports its components' kind).
    GroundKind ground() const;
    double distance(double a, double b) const;
    double draw(std::mt19937_64& rng) const;
};

// Throws InputError on malformed parameters (e.g. a mixture over different ground sets).
void validate_ground(const GroundDistribution& dist);
GroundDistribution ground_from_json(const nlohmann::json& doc);
nlohmann::json ground_to_json(const GroundDistribution& dist);

struct DiscreteMeasure {
    std::vector<double> coords;
    MetricMeasureSpace space;
};

// Fixed discretization standing in for the measure: the space itself for finite kinds, otherwise a
// uniform `grid`-point grid (interval: i/(grid-1) carrying the mass of its nearest-point cell;
// circle: k/grid).
DiscreteMeasure discretize(const GroundDistribution& dist, int grid = 64);

// Coordinates of n i.i.d. draws, in draw order.
std::vector<double> draw_points(const GroundDistribution& dist, int n, std::uint64_t seed);

// Empirical measure of the first n draws. Repeated points are merged into one atom of weight count/n;
// atoms are sorted by coordinate.
DiscreteMeasure empirical_measure(const GroundDistribution& dist, const std::vector<double>& draws);
MetricMeasureSpace sample_empirical(const GroundDistribution& dist, int n, std::uint64_t seed);

struct DyadicPartition {
    double delta = 1.0 / 3.0;
    // levels[k - 1] is the level-k partition: a list of cells of point indices.
    std::vector<std::vector<std::vector<int>>> levels;
    // parents[k - 1][c] is the level-(k-1) cell containing cell c of level k (0 for level 1).
    std::vector<std::vector<int>> parents;
    std::vector<std::string> warnings;

    int k_star() const { return static_cast<int>(levels.size()); }
    std::vector<int> counts() const;
};

// Each level-k cell has diameter <= delta^k and lies inside one level-(k-1) cell. Cells are grown
// greedily in index order, so points sorted along a line give interval cells.
DyadicPartition build_dyadic_partition(const Eigen::MatrixXd& dist, int k_star);

// Throws InputError describing the first violated invariant.
void validate_dyadic_partition(const DyadicPartition& part, const Eigen::MatrixXd& dist);

// sum over cells Q of level k of |a(Q) - b(Q)|, for k = 1..k*.
std::vector<double> level_discrepancies(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                        const DyadicPartition& part);

// h(eps) = eps^{pq}
inline double cost_modulus(double eps, double p, double q) { return std::pow(eps, p * q); }

// 3 lambda(S) sum_k h(delta^{k-1}) disc_k + h(delta^{k*}) lambda(S)^2.
// Throws InputError when the two masses differ by more than 1e-9.
double transport_upper_bound(const Eigen::VectorXd& lambda_w, const Eigen::VectorXd& mu_w,
                             const DyadicPartition& part, double p, double q);

struct RateConstants {
    double alpha = 0, c1 = 0, c2 = 0;
};

// Throws InputError naming the failing condition unless s > 2p, s > 2pq, 0 < eps_prime <= 1.
RateConstants rate_constants(double p, double q, double s, double eps_prime);
// C1 n^{-pq/s} + (3/2) n^{-p/s} + C2 n^{-1/2}
double rate_bound(int n, double p, double q, double s, double eps_prime);

// Expected level discrepancy envelope: 2 (1 - mu(S)) + sqrt(cells / n).
double deviation_bound(double mass_in_set, int cells, int n);

struct ExperimentConfig {
    GroundDistribution ground;
    int r = 1;
    double p = 1, q = 1;
    std::vector<int> n_values{4, 16, 64};
    int trials = 20;
    std::uint64_t seed = 1;
    int grid = 64;
    int k_star = 2;
    // Rate-bound parameters; the curve is omitted when they are outside s > 2p, s > 2pq, 0 < eps_prime <= 1.
    double s = 3;
    double eps_prime = 1;
    int jobs = 1;
    RelaxationOptions relaxation;
    SdpTolerances solver;
};

ExperimentConfig experiment_from_json(const nlohmann::json& doc, std::vector<std::string>* warnings = nullptr);

struct RateRow {
    int n = 0;
    int trials_ok = 0;
    int trials_failed = 0;
    double mean = 0, stdev = 0, stderr_ = 0;
    double transport_mean = 0;
    double bound = 0;  // rate_bound(n), NaN when out of domain
    std::vector<double> discrepancy_mean;  // per dyadic level
    std::vector<double> discrepancy_stderr;
    std::vector<double> deviation_envelope;  // per dyadic level
};

struct RateReport {
    std::vector<RateRow> rows;
    bool bound_in_domain = false;
    std::string bound_domain_message;
    double fitted_exponent = 0;  // slope of log mean against log n; NaN if a mean is not positive
    bool monotone = false;        // each mean <= previous + stderr of the difference
    bool below_bound = false;     // each mean <= rate_bound(n) (false when out of domain)
    std::vector<int> level_counts;
    std::vector<std::string> failures;
};

RateReport consistency_experiment(const ExperimentConfig& config);

nlohmann::json rate_report_to_json(const RateReport& report);
// Whitespace-separated columns, one row per n.
std::string rate_report_table(const RateReport& report);

}  // namespace gwsos

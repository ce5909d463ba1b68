#pragma once

#include "gwsos/hierarchy.hpp"
#include "gwsos/mmspace.hpp"

namespace gwsos {

enum class OracleMethod { exact_1d, grid_localsearch };
const char* to_string(OracleMethod m);

struct OracleResult {
    double value = 0.0;
    Coupling coupling;
    OracleMethod method = OracleMethod::grid_localsearch;
    // Worst marginal violation of the reported coupling.
    double certificate = 0.0;
    bool exact = false;
    int starts = 0;
};

struct OracleOptions {
    int grid_points = 21;
    std::size_t grid_cap = 2000000;
    int max_starts = 256;
    int max_iter = 500;
    double tol = 1e-10;
    int max_pairs = 16;
    // Use the grid path even where the closed form applies.
    bool force_grid = false;
    int jobs = 1;
};

// sum c[i][j][k][l] pi_ij pi_kl
double evaluate_objective(const Coupling& pi, const CostTensor& cost);

// Euclidean projection onto the couplings of (mu, nu).
Coupling project_to_couplings(const Coupling& v, const Eigen::VectorXd& mu, const Eigen::VectorXd& nu);

OracleResult brute_force_gw(const CostTensor& cost, const Eigen::VectorXd& mu, const Eigen::VectorXd& nu,
                            const OracleOptions& opts = {});
OracleResult brute_force_gw(const MetricMeasureSpace& X, const MetricMeasureSpace& Y, double p, double q,
                            const OracleOptions& opts = {});

}  // namespace gwsos

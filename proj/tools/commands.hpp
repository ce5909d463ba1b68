#pragma once

#include "gwsos/hierarchy.hpp"
#include "gwsos/sdp.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gwsos::cli {

enum ExitCode : int { kPass = 0, kInputError = 1, kNumericalIssue = 2 };

struct Common {
    int jobs = 1;
    std::uint64_t seed = 1;
    std::string output;
};

struct ProblemArgs {
    std::string x_file, y_file;
    int r = 1;
    double p = 1, q = 1;
    bool normalize = false;
    bool no_full_block = false;
    bool printed_marginals = false;
    bool no_facial_reduction = false;
    SdpTolerances tol;

    RelaxationOptions relaxation() const;
};

struct OracleArgs {
    std::string x_file, y_file;
    double p = 1, q = 1;
    bool normalize = false;
    int grid_points = 21;
    int max_starts = 256;
    bool force_grid = false;
};

struct MetricCheckArgs {
    std::vector<std::string> space_files;
    int random = 0;
    int max_points = 3;
    int r = 1;
    double p = 1, q = 1;
    double identity_tol = 1e-4, symmetry_tol = 1e-6, triangle_tol = 1e-4;
    SdpTolerances tol;
};

struct GlueCheckArgs {
    std::string x_file, y_file, z_file;
    int random_points = 2;
    std::string source = "product";  // product | oracle | solver
    int r = 1;
    double p = 1, q = 1;
    double marginal_tol = 1e-9, check_tol = 1e-6;
    SdpTolerances tol;
};

struct ConcentrateArgs {
    std::string x_file, y_file;
    std::string x_partition, y_partition;
    double eps = 0.0;
    int r = 1;
    double p = 1, q = 1;
    double lipschitz = 0;  // 0 means p * q
    double slack = 1e-4;
    std::string write_x, write_y;
    SdpTolerances tol;
};

struct ExperimentArgs {
    std::string config;
    bool seed_given = false;
    std::string table;
};

int cmd_lower_bound(const ProblemArgs& a, const Common& c);
int cmd_oracle(const OracleArgs& a, const Common& c);
int cmd_metric_check(const MetricCheckArgs& a, const Common& c);
int cmd_glue_check(const GlueCheckArgs& a, const Common& c);
int cmd_concentrate(const ConcentrateArgs& a, const Common& c);
int cmd_experiment(const ExperimentArgs& a, const Common& c);
int cmd_solver_dump(const ProblemArgs& a, const Common& c);

}  // namespace gwsos::cli

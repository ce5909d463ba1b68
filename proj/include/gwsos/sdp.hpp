#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace gwsos {

// One PSD constraint: constant + sum_i x_i * F_i  must be positive semidefinite.
struct SdpBlock {
    int dim = 0;
    Eigen::MatrixXd constant;
    std::vector<std::pair<int, Eigen::MatrixXd>> terms;
};

struct SdpEquality {
    std::vector<std::pair<int, double>> terms;
    double rhs = 0.0;
};

// minimize objective . x  subject to equalities and PSD blocks; x is free.
class SdpProblem {
public:
    explicit SdpProblem(int nvars = 0) : nvars_(nvars), objective_(Eigen::VectorXd::Zero(nvars)) {}

    int nvars() const { return nvars_; }
    const Eigen::VectorXd& objective() const { return objective_; }
    Eigen::VectorXd& objective() { return objective_; }
    const std::vector<SdpEquality>& equalities() const { return equalities_; }
    const std::vector<SdpBlock>& blocks() const { return blocks_; }

    void add_equality(SdpEquality eq);
    // Throws std::invalid_argument on a non-symmetric or mis-sized coefficient.
    void add_block(SdpBlock block);

    double objective_at(const Eigen::VectorXd& x) const;
    double equality_residual(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd block_value(int b, const Eigen::VectorXd& x) const;
    double min_block_eigenvalue(const Eigen::VectorXd& x) const;

    nlohmann::json to_json() const;

private:
    int nvars_;
    Eigen::VectorXd objective_;
    std::vector<SdpEquality> equalities_;
    std::vector<SdpBlock> blocks_;
};

enum class SdpStatus { optimal, max_iterations, numerical_failure, infeasible_suspected };
const char* to_string(SdpStatus s);

struct SdpTolerances {
    double feas = 1e-7;
    double gap = 1e-7;
    int max_iter = 200;
};

struct SdpSolution {
    Eigen::VectorXd x;
    double objective_value = 0.0;
    double dual_value = 0.0;
    SdpStatus status = SdpStatus::numerical_failure;
    double equality_residual = 0.0;
    double min_eigenvalue = 0.0;
    double gap = 0.0;
    int iterations = 0;
    std::string message;
};

SdpSolution solve(const SdpProblem& problem, const SdpTolerances& tol = {});

}  // namespace gwsos

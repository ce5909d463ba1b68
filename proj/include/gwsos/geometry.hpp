#pragma once

#include "gwsos/hierarchy.hpp"
#include "gwsos/mmspace.hpp"

#include <json.hpp>

#include <vector>

namespace gwsos {

struct CellPartition {
    std::vector<std::vector<int>> cells;
    std::vector<int> representatives;
    double radius = 0.0;

    int size() const { return static_cast<int>(cells.size()); }
    // Cell index of every point; throws InputError if the cells do not partition 0..npoints-1.
    std::vector<int> assignment(int npoints) const;
};

CellPartition singleton_partition(int npoints);
CellPartition single_cell_partition(int npoints, int representative = 0);
// Greedy farthest-point covering: centers are opened at the uncovered point farthest from the
// existing centers; each point joins its nearest center (earliest on ties).
CellPartition covering_partition(const MetricMeasureSpace& space, double eps);

// Throws InputError on overlap, gaps, empty cells, bad representatives or a radius violation.
void validate_partition(const CellPartition& part, const MetricMeasureSpace& space);

CellPartition partition_from_json(const nlohmann::json& doc);
nlohmann::json partition_to_json(const CellPartition& part);

Eigen::VectorXd concentrate_weights(const Eigen::VectorXd& weights, const CellPartition& part);
MetricMeasureSpace concentrate_space(const MetricMeasureSpace& space, const CellPartition& part);
Coupling concentrate_coupling(const Coupling& pi, const CellPartition& partX, const CellPartition& partY);
TensorMeasure concentrate_tensor(const TensorMeasure& P, const CellPartition& partX, const CellPartition& partY);

// Throws InputError when pibar's marginals miss the concentrated weights by more than 1e-7.
Coupling extend_coupling(const Coupling& pibar, const CellPartition& partX, const CellPartition& partY,
                         const Eigen::VectorXd& mu, const Eigen::VectorXd& nu);
TensorMeasure extend_tensor(const TensorMeasure& Pbar, const CellPartition& partX, const CellPartition& partY,
                            const Eigen::VectorXd& mu, const Eigen::VectorXd& nu);

// Tensor over (X x Y x Z)^{2r}; atom (x, y, z) has index (x * |Y| + y) * |Z| + z.
struct GluedMeasure {
    TensorMeasure tensor;
    TensorMeasure xy;
    TensorMeasure yz;
};

struct GlueResult {
    GluedMeasure S;
    TensorMeasure R;      // X x Z marginal
    double xy_error = 0;  // max |S|_{XY} - P|
    double yz_error = 0;  // max |S|_{YZ} - Q|
    int zero_slices = 0;  // Y-configurations with nu^{2r} = 0
};

// Throws InputError if the Y^{2r} marginals of P and Q differ by more than 1e-7.
GlueResult glue(const TensorMeasure& P, const TensorMeasure& Q, const Eigen::VectorXd& nu);

// Marginal of a three-factor tensor on two of its coordinates (0 = X, 1 = Y, 2 = Z), slotwise.
TensorMeasure pair_marginal(const TensorMeasure& S, int first, int second);

struct PseudoMetricOptions {
    double identity_tol = 1e-4;
    double symmetry_tol = 1e-6;
    double nonneg_tol = 1e-6;
    double triangle_tol = 1e-4;
    int jobs = 1;
    RelaxationOptions relaxation;
    SdpTolerances solver;
};

struct PseudoMetricReport {
    int r = 1;
    double p = 1, q = 1;
    Eigen::MatrixXd value;  // raw relaxation values, value(i, j) for (spaces[i], spaces[j])
    Eigen::MatrixXd delta;  // p-th roots
    std::vector<std::string> solver_issues;
    double identity_worst = 0;   // max delta(i, i)
    double symmetry_worst = 0;   // max |delta(i, j) - delta(j, i)|
    double nonneg_worst = 0;     // max(0, -min value)
    double triangle_worst = 0;   // max delta(i, k) - delta(i, j) - delta(j, k) over distinct triples
    int triples = 0;
    bool identity = false, symmetry = false, nonneg = false, triangle = false;
    bool passed() const { return identity && symmetry && nonneg && triangle && solver_issues.empty(); }
};

PseudoMetricReport pseudo_metric_check(const std::vector<MetricMeasureSpace>& spaces, int r, double p, double q,
                                       const PseudoMetricOptions& opts = {});

}  // namespace gwsos

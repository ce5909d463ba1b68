#pragma once

#include "gwsos/mmspace.hpp"
#include "gwsos/polymoment.hpp"
#include "gwsos/sdp.hpp"

#include <memory>
#include <stdexcept>
#include <vector>

namespace gwsos {

// Solver or internal-consistency problem. Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// m x n matrix with row sums mu and column sums nu.
using Coupling = Eigen::MatrixXd;

double coupling_marginal_error(const Coupling& pi, const Eigen::VectorXd& mu, const Eigen::VectorXd& nu);
Coupling product_coupling(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu);
// Coupling variables pi_ij in row-major order.
Eigen::VectorXd coupling_vector(const Coupling& pi);

struct RelaxationSpec {
    MetricMeasureSpace X;
    MetricMeasureSpace Y;
    int r = 1;
    CostTensor cost;
};

RelaxationSpec make_relaxation_spec(const MetricMeasureSpace& X, const MetricMeasureSpace& Y, int r, double p,
                                    double q);

struct RelaxationOptions {
    // Extra degree-<=r moment block on top of the degree-exact blocks.
    bool full_moment_block = true;
    // Marginal equalities l(r_i pi^g) = 0 for all |g| <= 2r-1; false uses |g| <= 2r-2.
    bool full_degree_marginals = true;
    // Compress each block onto the complement of the kernel forced by the marginal equalities.
    bool facial_reduction = true;
    std::size_t size_cap = kDefaultMonomialCap;
};

struct AssemblyInfo {
    int coupling_vars = 0;
    int moment_length = 0;
    int equalities = 0;
    int truncated_blocks = 0;
    int scalar_blocks = 0;
    int full_blocks = 0;
    std::vector<int> block_rows;     // rows before reduction, per block
    std::vector<int> block_dims;     // dimension passed to the solver, per block
};

struct Relaxation {
    SdpProblem problem;
    AssemblyInfo info;
    std::shared_ptr<const MonomialBasis> basis;
    int r = 1;
    int m = 0;
    int n = 0;
};

Relaxation assemble_relaxation(const RelaxationSpec& spec, const RelaxationOptions& opts = {});

struct LowerBound {
    double value = 0.0;
    double delta = 0.0;
    SdpSolution solution;
    MomentVector y;
    AssemblyInfo info;
    double seconds = 0.0;
};

// Spaces must have diameter <= 1. Throws NumericalError if the optimum is below -1e-6.
LowerBound gw_lower_bound(const MetricMeasureSpace& X, const MetricMeasureSpace& Y, int r, double p, double q,
                          const RelaxationOptions& opts = {}, const SdpTolerances& tol = {});

// Probability measure on A^{2r}, A = product of `factors` (e.g. {m, n} for X x Y).
// Entries are stored with slot 0 as the most significant digit.
struct TensorMeasure {
    int r = 1;
    std::vector<int> factors;
    std::vector<double> entries;

    int atoms() const;
    int slots() const { return 2 * r; }
    double total() const;
};

TensorMeasure make_tensor(int r, std::vector<int> factors);
std::size_t tensor_index(const std::vector<int>& atoms_per_slot, int atom_count);
std::vector<int> tensor_atoms(std::size_t index, int slots, int atom_count);

// Marginal over the first t slots (the rest summed out); t = 0 gives the total mass.
std::vector<double> leading_marginal(const TensorMeasure& P, int t);

// pi^{(x) 2r} for a coupling pi.
TensorMeasure product_tensor(const Coupling& pi, int r);

struct ForwardMapReport {
    int clamped = 0;
    double most_negative = 0.0;
};

// Throws InputError when an entry is below -1e-6 or the mass is off by more than 1e-5.
TensorMeasure moments_to_tensor_measure(const MomentVector& y, int r, int m, int n,
                                        ForwardMapReport* report = nullptr);
// Throws InputError when P is not symmetric within 1e-9.
MomentVector tensor_measure_to_moments(const TensorMeasure& P);

struct TensorCheckTolerances {
    double sym = 1e-9;
    double mar = 1e-7;
    double psd = 1e-7;
};

struct TensorCheck {
    bool sym = false;
    bool mar = false;
    bool psd = false;
    double sym_violation = 0.0;
    double mar_violation = 0.0;
    double psd_violation = 0.0;  // max(0, -min eigenvalue)
    bool passed() const { return sym && mar && psd; }
    double worst() const;
};

TensorCheck check_tensor_measure(const TensorMeasure& P, const Eigen::VectorXd& mu, const Eigen::VectorXd& nu,
                                 const TensorCheckTolerances& tol = {});

// Integral of c over the first two slots.
double tensor_objective(const TensorMeasure& P, const CostTensor& cost);
// sum c_{ab} y_{e_a + e_b}
double moment_objective(const MomentVector& y, const CostTensor& cost);

}  // namespace gwsos

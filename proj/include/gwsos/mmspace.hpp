#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace gwsos {

// Malformed or invalid user input. Maps to CLI exit code 1.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Finite metric measure space: points, a distance matrix, a probability vector.
struct MetricMeasureSpace {
    std::string name;
    std::vector<std::string> labels;
    Eigen::MatrixXd dist;
    Eigen::VectorXd weights;
    // Factor the original distances were divided by (1 if never normalized).
    double scale = 1.0;
    // Indices of points that carry zero mass. They are kept, not removed.
    std::vector<int> zero_weight;

    int size() const { return static_cast<int>(weights.size()); }
    double diameter() const { return dist.size() ? dist.maxCoeff() : 0.0; }
};

struct SpaceTolerances {
    double symmetry = 1e-12;
    double triangle = 1e-9;
    double weight_sum = 1e-6;
};

// Validates and returns the space. Weights are rescaled to sum to exactly 1
// after the tolerance check. Labels default to "0", "1", ...
MetricMeasureSpace make_space(const Eigen::MatrixXd& dist, const Eigen::VectorXd& weights,
                              std::vector<std::string> labels = {}, std::string name = {},
                              const SpaceTolerances& tol = {});

// Throws InputError naming the offending indices.
void validate_space(const MetricMeasureSpace& space, const SpaceTolerances& tol = {});

// Unknown fields are reported through `warnings` and otherwise ignored.
MetricMeasureSpace load_space(const nlohmann::json& doc, std::vector<std::string>* warnings = nullptr,
                              const SpaceTolerances& tol = {});
MetricMeasureSpace load_space_file(const std::string& path, std::vector<std::string>* warnings = nullptr,
                                   const SpaceTolerances& tol = {});
nlohmann::json space_to_json(const MetricMeasureSpace& space);

MetricMeasureSpace normalize_diameter(const MetricMeasureSpace& space);

// c[(i,j),(k,l)] = |dX(i,k)^q - dY(j,l)^q|^p, stored over pair indices a = i*n + j.
struct CostTensor {
    int m = 0;
    int n = 0;
    double p = 1.0;
    double q = 1.0;
    std::vector<double> entries;

    int pairs() const { return m * n; }
    double operator()(int i, int j, int k, int l) const { return entries[pair_offset(i * n + j, k * n + l)]; }
    double pair(int a, int b) const { return entries[pair_offset(a, b)]; }
    std::size_t pair_offset(int a, int b) const {
        return static_cast<std::size_t>(a) * static_cast<std::size_t>(m * n) + static_cast<std::size_t>(b);
    }
};

CostTensor build_cost_tensor(const MetricMeasureSpace& X, const MetricMeasureSpace& Y, double p, double q);

// Default Lipschitz constant of the cost on diameter-one spaces.
inline double lipschitz_constant(double p, double q) { return p * q; }

}  // namespace gwsos

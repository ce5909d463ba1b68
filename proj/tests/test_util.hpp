#pragma once

#include "gwsos/mmspace.hpp"

#include <random>

namespace gwsos::testing {

inline MetricMeasureSpace two_point(double d, double w0 = 0.5) {
    Eigen::MatrixXd D(2, 2);
    D << 0, d, d, 0;
    return make_space(D, Eigen::Vector2d(w0, 1.0 - w0));
}

// Points in the unit square, weights bounded away from zero, diameter normalized to 1.
inline MetricMeasureSpace random_space(int n, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd P(n, 2);
    for (int i = 0; i < n; ++i) P.row(i) << u(rng), u(rng);
    Eigen::MatrixXd D(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) D(i, j) = (P.row(i) - P.row(j)).norm();
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) w(i) = 0.1 + u(rng);
    w /= w.sum();
    return normalize_diameter(make_space(D, w));
}

}  // namespace gwsos::testing

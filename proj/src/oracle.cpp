#include "gwsos/oracle.hpp"

#include "gwsos/kernels.hpp"
#include "gwsos/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gwsos {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* to_string(OracleMethod m) { return m == OracleMethod::exact_1d ? "exact_1d" : "grid_localsearch"; }

double evaluate_objective(const Coupling& pi, const CostTensor& cost) {
    if (pi.rows() != cost.m || pi.cols() != cost.n) throw InputError("coupling dimensions do not match the cost tensor");
    const VectorXd v = coupling_vector(pi);
    return kernels::quadratic_form(cost.entries.data(), v.data(), static_cast<std::size_t>(v.size()));
}

namespace {

// Threshold a with sum_j max(0, w_j - a) = s, for s > 0.
double threshold(std::vector<double> w, double s) {
    if (s <= 0) return *std::max_element(w.begin(), w.end());
    std::sort(w.begin(), w.end(), std::greater<double>());
    double acc = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        acc += w[k];
        const double a = (acc - s) / static_cast<double>(k + 1);
        if (k + 1 == w.size() || a >= w[k + 1]) return a;
    }
    return (acc - s) / static_cast<double>(w.size());
}

bool lex_less(const Coupling& a, const Coupling& b) {
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (a(i, j) != b(i, j)) return a(i, j) < b(i, j);
    return false;
}

struct Candidate {
    double value = std::numeric_limits<double>::infinity();
    Coupling pi;
};

// Smaller value wins; values within 1e-12 fall back to the lexicographic order.
bool better(const Candidate& a, const Candidate& b) {
    if (std::abs(a.value - b.value) > 1e-12) return a.value < b.value;
    return lex_less(a.pi, b.pi);
}

Candidate refine(const Coupling& start, const CostTensor& cost, const VectorXd& mu, const VectorXd& nu,
                 const OracleOptions& opts) {
    const int m = cost.m, n = cost.n, mn = m * n;
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> C(
        cost.entries.data(), mn, mn);
    Coupling pi = project_to_couplings(start, mu, nu);
    double f = evaluate_objective(pi, cost);
    double step = 1.0 / std::max(1e-12, 2.0 * C.norm());
    for (int it = 0; it < opts.max_iter; ++it) {
        const VectorXd g = 2.0 * (C * coupling_vector(pi));
        Coupling grad(m, n);
        for (int a = 0; a < mn; ++a) grad(a / n, a % n) = g(a);
        bool accepted = false;
        Coupling next;
        double fn = f;
        for (int ls = 0; ls < 60; ++ls) {
            next = project_to_couplings(pi - step * grad, mu, nu);
            fn = evaluate_objective(next, cost);
            const double decrease = (grad.array() * (next - pi).array()).sum();
            if (fn <= f + 1e-4 * decrease) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        const double move = (next - pi).cwiseAbs().maxCoeff();
        const double drop = f - fn;
        pi = next;
        f = fn;
        if (move < opts.tol || drop < opts.tol * opts.tol) break;
        step *= 2.0;
    }
    return {f, pi};
}

Coupling complete(const std::vector<double>& free, const VectorXd& mu, const VectorXd& nu) {
    const int m = static_cast<int>(mu.size()), n = static_cast<int>(nu.size());
    Coupling pi = Coupling::Zero(m, n);
    for (int i = 0; i + 1 < m; ++i)
        for (int j = 0; j + 1 < n; ++j) pi(i, j) = free[i * (n - 1) + j];
    for (int i = 0; i + 1 < m; ++i) pi(i, n - 1) = mu(i) - pi.row(i).head(n - 1).sum();
    for (int j = 0; j + 1 < n; ++j) pi(m - 1, j) = nu(j) - pi.col(j).head(m - 1).sum();
    pi(m - 1, n - 1) = nu(n - 1) - pi.col(n - 1).head(m - 1).sum();
    return pi;
}

OracleResult exact_two_by_two(const CostTensor& cost, const VectorXd& mu, const VectorXd& nu) {
    // pi(a) = base + a * D on a in [lo, hi].
    Coupling base(2, 2);
    base << 0, mu(0), nu(0), 1.0 - mu(0) - nu(0);
    Coupling D(2, 2);
    D << 1, -1, -1, 1;
    const double lo = std::max(0.0, mu(0) + nu(0) - 1.0), hi = std::min(mu(0), nu(0));
    const VectorXd b = coupling_vector(base), d = coupling_vector(D);
    const Eigen::Map<const Eigen::Matrix<double, 4, 4, Eigen::RowMajor>> C(cost.entries.data());
    const double quad = d.dot(C * d), lin = 2.0 * d.dot(C * b);
    std::vector<double> cands = {lo, hi};
    if (quad > 0) {
        const double v = -lin / (2.0 * quad);
        if (v > lo && v < hi) cands.push_back(v);
    }
    Candidate best;
    for (double a : cands) {
        Candidate c{0.0, base + a * D};
        c.pi = c.pi.cwiseMax(0.0);
        c.value = evaluate_objective(c.pi, cost);
        if (better(c, best)) best = c;
    }
    OracleResult res;
    res.value = best.value;
    res.coupling = best.pi;
    res.method = OracleMethod::exact_1d;
    res.exact = true;
    res.certificate = coupling_marginal_error(best.pi, mu, nu);
    res.starts = static_cast<int>(cands.size());
    return res;
}

}  // namespace

Coupling project_to_couplings(const Coupling& v, const VectorXd& mu, const VectorXd& nu) {
    // Maximize the concave dual g(a, b) = -mu.a - nu.b - |(v - a 1' - 1 b')_+|^2 / 2; pi is the positive part.
    const int m = static_cast<int>(v.rows()), n = static_cast<int>(v.cols());
    VectorXd alpha = VectorXd::Zero(m), beta = VectorXd::Zero(n);
    auto primal = [&](const VectorXd& a, const VectorXd& b) {
        Coupling pi(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) pi(i, j) = std::max(0.0, v(i, j) - a(i) - b(j));
        return pi;
    };
    auto dual = [&](const VectorXd& a, const VectorXd& b) {
        return -mu.dot(a) - nu.dot(b) - 0.5 * primal(a, b).squaredNorm();
    };
    auto residual = [&](const Coupling& p) {
        return std::sqrt((p.rowwise().sum() - mu).squaredNorm() + (p.colwise().sum().transpose() - nu).squaredNorm());
    };
    std::vector<double> w;
    // A few exact block sweeps give a good start for Newton.
    for (int sweep = 0; sweep < 3; ++sweep) {
        for (int i = 0; i < m; ++i) {
            w.resize(n);
            for (int j = 0; j < n; ++j) w[j] = v(i, j) - beta(j);
            alpha(i) = threshold(w, mu(i));
        }
        for (int j = 0; j < n; ++j) {
            w.resize(m);
            for (int i = 0; i < m; ++i) w[i] = v(i, j) - alpha(i);
            beta(j) = threshold(w, nu(j));
        }
    }
    Coupling pi = primal(alpha, beta);
    for (int it = 0; it < 200; ++it) {
        VectorXd grad(m + n);
        grad.head(m) = pi.rowwise().sum() - mu;
        grad.tail(n) = pi.colwise().sum().transpose() - nu;
        if (grad.cwiseAbs().maxCoeff() < 1e-15) break;
        // Generalized Hessian of -g on the current support.
        MatrixXd H = MatrixXd::Zero(m + n, m + n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j)
                if (pi(i, j) > 0) {
                    H(i, i) += 1;
                    H(m + j, m + j) += 1;
                    H(i, m + j) += 1;
                    H(m + j, i) += 1;
                }
        H.diagonal().array() += 1e-12;
        VectorXd dir = H.completeOrthogonalDecomposition().solve(grad);
        if (dir.dot(grad) <= 0) dir = grad;
        const double g0 = dual(alpha, beta);
        double t = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
            const VectorXd a = alpha + t * dir.head(m), b = beta + t * dir.tail(n);
            // Near the optimum g is flat to rounding, so a shrinking residual also counts as progress.
            if (dual(a, b) >= g0 + 1e-4 * t * dir.dot(grad) ||
                residual(primal(a, b)) < (1.0 - 1e-4 * t) * grad.norm()) {
                alpha = a;
                beta = b;
                moved = true;
                break;
            }
        }
        if (!moved) break;
        pi = primal(alpha, beta);
    }
    return pi;
}

OracleResult brute_force_gw(const CostTensor& cost, const VectorXd& mu, const VectorXd& nu, const OracleOptions& opts) {
    const int m = cost.m, n = cost.n;
    if (mu.size() != m || nu.size() != n) throw InputError("marginals do not match the cost tensor");
    if (m * n > opts.max_pairs) throw InputError("oracle size cap exceeded (m*n > " + std::to_string(opts.max_pairs) + ")");
    if (m == 2 && n == 2 && !opts.force_grid) return exact_two_by_two(cost, mu, nu);

    const int dims = (m - 1) * (n - 1);
    int res = std::max(2, opts.grid_points);
    while (dims > 0 && std::pow(static_cast<double>(res), dims) > static_cast<double>(opts.grid_cap) && res > 2) --res;
    std::vector<double> hi(dims);
    for (int i = 0; i + 1 < m; ++i)
        for (int j = 0; j + 1 < n; ++j) hi[i * (n - 1) + j] = std::min(mu(i), nu(j));

    std::size_t total = 1;
    for (int d = 0; d < dims; ++d) total *= static_cast<std::size_t>(res);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> values(total, nan);
    std::vector<double> free(dims);
    std::vector<int> digit(dims, 0);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        for (int d = dims - 1; d >= 0; --d) {
            digit[d] = static_cast<int>(rem % res);
            rem /= res;
            free[d] = hi[d] * digit[d] / (res - 1);
        }
        const Coupling pi = complete(free, mu, nu);
        if (pi.minCoeff() >= -1e-15) values[idx] = evaluate_objective(pi.cwiseMax(0.0), cost);
    }

    // Starts: discrete local minima of the grid, best first.
    std::vector<std::size_t> starts;
    std::vector<std::size_t> stride(dims, 1);
    for (int d = dims - 2; d >= 0; --d) stride[d] = stride[d + 1] * res;
    for (std::size_t idx = 0; idx < total; ++idx) {
        if (std::isnan(values[idx])) continue;
        bool local = true;
        for (int d = 0; d < dims && local; ++d) {
            const int dg = static_cast<int>((idx / stride[d]) % res);
            if (dg > 0 && !std::isnan(values[idx - stride[d]]) && values[idx - stride[d]] < values[idx]) local = false;
            if (dg + 1 < res && !std::isnan(values[idx + stride[d]]) && values[idx + stride[d]] < values[idx]) local = false;
        }
        if (local) starts.push_back(idx);
    }
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    auto by_value = [&](std::size_t a, std::size_t b) {
        const bool na = std::isnan(values[a]), nb = std::isnan(values[b]);
        if (na != nb) return nb;
        if (!na && values[a] != values[b]) return values[a] < values[b];
        return a < b;
    };
    std::sort(starts.begin(), starts.end(), by_value);
    if (static_cast<int>(starts.size()) > opts.max_starts) starts.resize(opts.max_starts);
    std::partial_sort(order.begin(), order.begin() + std::min<std::size_t>(8, total), order.end(), by_value);
    for (std::size_t k = 0; k < std::min<std::size_t>(8, total); ++k)
        if (!std::isnan(values[order[k]]) && std::find(starts.begin(), starts.end(), order[k]) == starts.end())
            starts.push_back(order[k]);
    if (starts.empty()) starts.push_back(0);

    std::vector<Candidate> found(starts.size());
    parallel_for(starts.size(), opts.jobs, [&](std::size_t s) {
        std::vector<double> fr(dims);
        std::size_t rem = starts[s];
        for (int d = dims - 1; d >= 0; --d) {
            fr[d] = hi[d] * static_cast<double>(rem % res) / (res - 1);
            rem /= res;
        }
        found[s] = refine(complete(fr, mu, nu).cwiseMax(0.0), cost, mu, nu, opts);
    });
    Candidate best;
    for (const auto& c : found)
        if (better(c, best)) best = c;

    OracleResult out;
    out.coupling = best.pi;
    out.value = evaluate_objective(best.pi, cost);
    out.method = OracleMethod::grid_localsearch;
    out.exact = false;
    out.certificate = coupling_marginal_error(best.pi, mu, nu);
    out.starts = static_cast<int>(starts.size());
    return out;
}

OracleResult brute_force_gw(const MetricMeasureSpace& X, const MetricMeasureSpace& Y, double p, double q,
                            const OracleOptions& opts) {
    return brute_force_gw(build_cost_tensor(X, Y, p, q), X.weights, Y.weights, opts);
}

}  // namespace gwsos

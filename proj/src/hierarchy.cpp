#include "gwsos/hierarchy.hpp"

#include "gwsos/kernels.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

namespace gwsos {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double coupling_marginal_error(const Coupling& pi, const VectorXd& mu, const VectorXd& nu) {
    if (pi.rows() != mu.size() || pi.cols() != nu.size()) return std::numeric_limits<double>::infinity();
    const double row = (pi.rowwise().sum() - mu).cwiseAbs().maxCoeff();
    const double col = (pi.colwise().sum().transpose() - nu).cwiseAbs().maxCoeff();
    return std::max(row, col);
}

Coupling product_coupling(const VectorXd& mu, const VectorXd& nu) { return mu * nu.transpose(); }

VectorXd coupling_vector(const Coupling& pi) {
    VectorXd v(pi.size());
    for (int i = 0; i < pi.rows(); ++i)
        for (int j = 0; j < pi.cols(); ++j) v(i * pi.cols() + j) = pi(i, j);
    return v;
}

RelaxationSpec make_relaxation_spec(const MetricMeasureSpace& X, const MetricMeasureSpace& Y, int r, double p,
                                    double q) {
    if (r < 1) throw InputError("relaxation level r must be >= 1");
    if (X.size() == 0 || Y.size() == 0) throw InputError("spaces must be nonempty");
    RelaxationSpec spec;
    spec.X = X;
    spec.Y = Y;
    spec.r = r;
    spec.cost = build_cost_tensor(X, Y, p, q);
    return spec;
}

namespace {

// Orthonormal basis of the orthogonal complement of span(U) in R^dim.
MatrixXd complement_basis(const MatrixXd& U, int dim) {
    if (U.cols() == 0) return MatrixXd::Identity(dim, dim);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(U * U.transpose());
    const auto& ev = es.eigenvalues();
    const double cut = 1e-10 * std::max(1.0, ev(dim - 1));
    int keep = 0;
    while (keep < dim && ev(keep) < cut) ++keep;
    return es.eigenvectors().leftCols(keep);
}

// Combinations of `size` distinct variables out of nvars, lexicographic.
std::vector<std::vector<int>> subsets(int nvars, int size) {
    std::vector<std::vector<int>> out;
    if (size > nvars) return out;
    std::vector<int> c(size);
    for (int i = 0; i < size; ++i) c[i] = i;
    while (true) {
        out.push_back(c);
        int i = size - 1;
        while (i >= 0 && c[i] == nvars - size + i) --i;
        if (i < 0) break;
        ++c[i];
        for (int j = i + 1; j < size; ++j) c[j] = c[j - 1] + 1;
    }
    return out;
}

struct Assembler {
    const RelaxationSpec& spec;
    const RelaxationOptions& opts;
    const MonomialBasis& basis;
    int m, n, nv, r;
    Relaxation& out;

    // Marginal generator rows for the homogeneous degree-k block (|delta| = k - 1).
    MatrixXd homogeneous_kernel(int k) const {
        const int begin = basis.degree_begin(k);
        const int dim = basis.degree_end(k) - begin;
        if (k == 0) return MatrixXd(dim, 0);
        std::vector<VectorXd> gens;
        for (int pd = basis.degree_begin(k - 1); pd < basis.degree_end(k - 1); ++pd) {
            const MultiIndex& delta = basis[pd];
            VectorXd all = VectorXd::Zero(dim);
            for (int a = 0; a < nv; ++a) all(basis.find(delta + unit_index(nv, a)) - begin) += 1.0;
            for (int i = 0; i < m; ++i) {
                VectorXd u = -spec.X.weights(i) * all;
                for (int j = 0; j < n; ++j) u(basis.find(delta + unit_index(nv, i * n + j)) - begin) += 1.0;
                gens.push_back(u);
            }
            for (int j = 0; j < n; ++j) {
                VectorXd u = -spec.Y.weights(j) * all;
                for (int i = 0; i < m; ++i) u(basis.find(delta + unit_index(nv, i * n + j)) - begin) += 1.0;
                gens.push_back(u);
            }
        }
        MatrixXd U(dim, static_cast<int>(gens.size()));
        for (int g = 0; g < U.cols(); ++g) U.col(g) = gens[g];
        return U;
    }

    // Marginal generator rows for the degree-<=r block (|delta| <= r - 1).
    MatrixXd full_kernel() const {
        const int dim = basis.degree_end(r);
        std::vector<VectorXd> gens;
        for (int pd = 0; pd < basis.degree_end(r - 1); ++pd) {
            const MultiIndex& delta = basis[pd];
            VectorXd total = VectorXd::Zero(dim);
            total(pd) -= 1.0;
            for (int a = 0; a < nv; ++a) total(basis.find(delta + unit_index(nv, a))) += 1.0;
            gens.push_back(total);
            for (int i = 0; i < m; ++i) {
                VectorXd u = VectorXd::Zero(dim);
                u(pd) -= spec.X.weights(i);
                for (int j = 0; j < n; ++j) u(basis.find(delta + unit_index(nv, i * n + j))) += 1.0;
                gens.push_back(u);
            }
            for (int j = 0; j < n; ++j) {
                VectorXd u = VectorXd::Zero(dim);
                u(pd) -= spec.Y.weights(j);
                for (int i = 0; i < m; ++i) u(basis.find(delta + unit_index(nv, i * n + j))) += 1.0;
                gens.push_back(u);
            }
        }
        MatrixXd U(dim, static_cast<int>(gens.size()));
        for (int g = 0; g < U.cols(); ++g) U.col(g) = gens[g];
        return U;
    }

    // Block with entries y_{a+b+shift} over basis rows [begin, end), compressed by V.
    void add_block(int begin, int end, const MultiIndex& shift, const MatrixXd& V) {
        const int k = end - begin;
        const int kr = static_cast<int>(V.cols());
        out.info.block_rows.push_back(k);
        if (kr == 0) {
            out.info.block_dims.push_back(0);
            return;
        }
        std::map<int, MatrixXd> coeff;
        for (int p = 0; p < k; ++p)
            for (int q = p; q < k; ++q) {
                const int pos = basis.find(basis[begin + p] + basis[begin + q] + shift);
                auto it = coeff.find(pos);
                if (it == coeff.end()) it = coeff.emplace(pos, MatrixXd::Zero(kr, kr)).first;
                if (p == q) it->second.noalias() += V.row(p).transpose() * V.row(p);
                else it->second.noalias() += V.row(p).transpose() * V.row(q) + V.row(q).transpose() * V.row(p);
            }
        SdpBlock blk;
        blk.dim = kr;
        blk.constant = MatrixXd::Zero(kr, kr);
        for (auto& [pos, F] : coeff) {
            MatrixXd S = 0.5 * (F + F.transpose());
            if (S.cwiseAbs().maxCoeff() < 1e-15) continue;
            blk.terms.emplace_back(pos, std::move(S));
        }
        out.info.block_dims.push_back(kr);
        out.problem.add_block(std::move(blk));
    }

    void run() {
        const int len = basis.size();
        out.problem = SdpProblem(len);
        out.info.coupling_vars = nv;
        out.info.moment_length = len;

        // objective: sum c_ab y_{e_a + e_b}
        for (int a = 0; a < nv; ++a)
            for (int b = 0; b < nv; ++b) {
                const double c = spec.cost.pair(a, b);
                if (c != 0.0) out.problem.objective()(basis.find(unit_index(nv, a) + unit_index(nv, b))) += c;
            }

        out.problem.add_equality({{{0, 1.0}}, 1.0});
        const int top = opts.full_degree_marginals ? 2 * r - 1 : 2 * r - 2;
        for (int pg = 0; pg < basis.degree_end(top); ++pg) {
            const MultiIndex& g = basis[pg];
            for (int i = 0; i < m; ++i) {
                SdpEquality eq;
                for (int j = 0; j < n; ++j) eq.terms.emplace_back(basis.find(g + unit_index(nv, i * n + j)), 1.0);
                if (spec.X.weights(i) != 0.0) eq.terms.emplace_back(pg, -spec.X.weights(i));
                out.problem.add_equality(std::move(eq));
            }
            for (int j = 0; j < n; ++j) {
                SdpEquality eq;
                for (int i = 0; i < m; ++i) eq.terms.emplace_back(basis.find(g + unit_index(nv, i * n + j)), 1.0);
                if (spec.Y.weights(j) != 0.0) eq.terms.emplace_back(pg, -spec.Y.weights(j));
                out.problem.add_equality(std::move(eq));
            }
        }
        out.info.equalities = static_cast<int>(out.problem.equalities().size());

        const bool reduce = opts.facial_reduction && opts.full_degree_marginals;
        for (int d = 0; d <= r; ++d) {
            const int k = r - d;
            const int begin = basis.degree_begin(k), end = basis.degree_end(k);
            const MatrixXd V = reduce ? complement_basis(homogeneous_kernel(k), end - begin)
                                      : MatrixXd::Identity(end - begin, end - begin);
            for (const auto& I : subsets(nv, 2 * d)) {
                MultiIndex shift(nv, 0);
                for (int v : I) shift[v] = 1;
                add_block(begin, end, shift, V);
                if (end - begin == 1) ++out.info.scalar_blocks;
                else ++out.info.truncated_blocks;
            }
        }
        if (opts.full_moment_block) {
            const int end = basis.degree_end(r);
            const MatrixXd V = reduce ? complement_basis(full_kernel(), end) : MatrixXd::Identity(end, end);
            add_block(0, end, MultiIndex(nv, 0), V);
            ++out.info.full_blocks;
        }
    }
};

}  // namespace

Relaxation assemble_relaxation(const RelaxationSpec& spec, const RelaxationOptions& opts) {
    const int m = spec.X.size(), n = spec.Y.size();
    if (m == 0 || n == 0) throw InputError("spaces must be nonempty");
    if (spec.r < 1) throw InputError("relaxation level r must be >= 1");
    Relaxation out;
    out.r = spec.r;
    out.m = m;
    out.n = n;
    out.basis = monomial_basis(m * n, 2 * spec.r, opts.size_cap);
    Assembler as{spec, opts, *out.basis, m, n, m * n, spec.r, out};
    as.run();
    return out;
}

LowerBound gw_lower_bound(const MetricMeasureSpace& X, const MetricMeasureSpace& Y, int r, double p, double q,
                          const RelaxationOptions& opts, const SdpTolerances& tol) {
    for (const auto* s : {&X, &Y})
        if (s->diameter() > 1.0 + 1e-12) throw InputError("spaces must be diameter-normalized (diameter <= 1)");
    const auto t0 = std::chrono::steady_clock::now();
    const auto spec = make_relaxation_spec(X, Y, r, p, q);
    Relaxation rel = assemble_relaxation(spec, opts);
    LowerBound lb;
    lb.info = rel.info;
    lb.solution = solve(rel.problem, tol);
    lb.y.basis = rel.basis;
    lb.y.order = r;
    lb.y.values = lb.solution.x;
    lb.value = lb.solution.objective_value;
    if (lb.solution.status == SdpStatus::optimal && lb.value < -1e-6) {
        std::ostringstream os;
        os << "relaxation value " << lb.value << " is negative beyond tolerance";
        throw NumericalError(os.str());
    }
    lb.delta = std::pow(std::max(0.0, lb.value), 1.0 / p);
    lb.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return lb;
}

int TensorMeasure::atoms() const {
    int a = 1;
    for (int f : factors) a *= f;
    return a;
}

double TensorMeasure::total() const {
    double s = 0;
    for (double v : entries) s += v;
    return s;
}

namespace {

std::size_t ipow(std::size_t base, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

}  // namespace

TensorMeasure make_tensor(int r, std::vector<int> factors) {
    TensorMeasure P;
    P.r = r;
    P.factors = std::move(factors);
    P.entries.assign(ipow(static_cast<std::size_t>(P.atoms()), 2 * r), 0.0);
    return P;
}

std::size_t tensor_index(const std::vector<int>& atoms_per_slot, int atom_count) {
    std::size_t idx = 0;
    for (int a : atoms_per_slot) idx = idx * static_cast<std::size_t>(atom_count) + static_cast<std::size_t>(a);
    return idx;
}

std::vector<int> tensor_atoms(std::size_t index, int slots, int atom_count) {
    std::vector<int> out(slots);
    for (int s = slots - 1; s >= 0; --s) {
        out[s] = static_cast<int>(index % static_cast<std::size_t>(atom_count));
        index /= static_cast<std::size_t>(atom_count);
    }
    return out;
}

std::vector<double> leading_marginal(const TensorMeasure& P, int t) {
    const std::size_t A = static_cast<std::size_t>(P.atoms());
    const std::size_t tail = ipow(A, P.slots() - t);
    std::vector<double> out(ipow(A, t), 0.0);
    for (std::size_t h = 0; h < out.size(); ++h) {
        double s = 0;
        for (std::size_t k = 0; k < tail; ++k) s += P.entries[h * tail + k];
        out[h] = s;
    }
    return out;
}

TensorMeasure product_tensor(const Coupling& pi, int r) {
    TensorMeasure P = make_tensor(r, {static_cast<int>(pi.rows()), static_cast<int>(pi.cols())});
    const VectorXd v = coupling_vector(pi);
    const int A = P.atoms();
    for (std::size_t idx = 0; idx < P.entries.size(); ++idx) {
        double w = 1.0;
        for (int a : tensor_atoms(idx, P.slots(), A)) w *= v(a);
        P.entries[idx] = w;
    }
    return P;
}

TensorMeasure moments_to_tensor_measure(const MomentVector& y, int r, int m, int n, ForwardMapReport* report) {
    const int nv = m * n;
    if (y.nvars() != nv || y.order < r) throw InputError("moment vector does not match the tensor shape");
    TensorMeasure P = make_tensor(r, {m, n});
    ForwardMapReport rep;
    MultiIndex a(nv, 0);
    for (std::size_t idx = 0; idx < P.entries.size(); ++idx) {
        std::fill(a.begin(), a.end(), 0);
        for (int atom : tensor_atoms(idx, 2 * r, nv)) ++a[atom];
        double v = y[a];
        if (v < 0) {
            rep.most_negative = std::min(rep.most_negative, v);
            if (v < -1e-6) {
                std::ostringstream os;
                os << "tensor entry " << v << " below -1e-6: moment vector is not feasible";
                throw InputError(os.str());
            }
            ++rep.clamped;
            v = 0.0;
        }
        P.entries[idx] = v;
    }
    const double mass = P.total();
    if (std::abs(mass - 1.0) > 1e-5) {
        std::ostringstream os;
        os << "tensor mass " << mass << " deviates from 1";
        throw InputError(os.str());
    }
    if (report) *report = rep;
    return P;
}

namespace {

double symmetry_violation(const TensorMeasure& P) {
    const int A = P.atoms(), S = P.slots();
    double worst = 0;
    for (std::size_t idx = 0; idx < P.entries.size(); ++idx) {
        auto at = tensor_atoms(idx, S, A);
        for (int s = 0; s + 1 < S; ++s) {
            std::swap(at[s], at[s + 1]);
            worst = std::max(worst, std::abs(P.entries[idx] - P.entries[tensor_index(at, A)]));
            std::swap(at[s], at[s + 1]);
        }
    }
    return worst;
}

}  // namespace

MomentVector tensor_measure_to_moments(const TensorMeasure& P) {
    if (P.factors.size() != 2) throw InputError("expected a tensor over X x Y atoms");
    if (symmetry_violation(P) > 1e-9) throw InputError("tensor measure is not permutation symmetric");
    const int nv = P.atoms();
    MomentVector y(nv, P.r);
    const auto& basis = *y.basis;
    std::vector<std::vector<double>> marg(P.slots() + 1);
    for (int t = 0; t <= P.slots(); ++t) marg[t] = leading_marginal(P, t);
    for (int pos = 0; pos < basis.size(); ++pos) {
        const MultiIndex& g = basis[pos];
        std::vector<int> atoms;
        for (int a = 0; a < nv; ++a)
            for (int e = 0; e < g[a]; ++e) atoms.push_back(a);
        y.values(pos) = marg[atoms.size()][tensor_index(atoms, nv)];
    }
    return y;
}

double TensorCheck::worst() const { return std::max({sym_violation, mar_violation, psd_violation}); }

TensorCheck check_tensor_measure(const TensorMeasure& P, const VectorXd& mu, const VectorXd& nu,
                                 const TensorCheckTolerances& tol) {
    TensorCheck rep;
    if (P.factors.size() != 2 || P.factors[0] != mu.size() || P.factors[1] != nu.size())
        throw InputError("tensor shape does not match the marginals");
    const int m = P.factors[0], n = P.factors[1], A = m * n, S = P.slots();
    rep.sym_violation = symmetry_violation(P);

    // (Mar): summing one slot's Y (resp. X) coordinate gives mu (resp. nu) times the rest.
    const std::size_t rest = ipow(A, S - 1);
    double mar = 0;
    for (int s = 0; s < S; ++s) {
        std::vector<double> xm(rest * m, 0.0), ym(rest * n, 0.0), tot(rest, 0.0);
        for (std::size_t idx = 0; idx < P.entries.size(); ++idx) {
            auto at = tensor_atoms(idx, S, A);
            const int a = at[s];
            at.erase(at.begin() + s);
            const std::size_t ri = tensor_index(at, A);
            const double v = P.entries[idx];
            xm[ri * m + a / n] += v;
            ym[ri * n + a % n] += v;
            tot[ri] += v;
        }
        for (std::size_t ri = 0; ri < rest; ++ri) {
            for (int i = 0; i < m; ++i) mar = std::max(mar, std::abs(xm[ri * m + i] - mu(i) * tot[ri]));
            for (int j = 0; j < n; ++j) mar = std::max(mar, std::abs(ym[ri * n + j] - nu(j) * tot[ri]));
        }
    }
    rep.mar_violation = mar;

    // (PSD): fix the first 2d slots, split the remaining 2(r-d) into two halves.
    double lmin = 0;
    for (int d = 0; d <= P.r; ++d) {
        const int h = P.r - d;
        const std::size_t side = ipow(A, h);
        const std::size_t prefixes = ipow(A, 2 * d);
        for (std::size_t pre = 0; pre < prefixes; ++pre) {
            const double* base = P.entries.data() + pre * side * side;
            if (side == 1) {
                lmin = std::min(lmin, base[0]);
                continue;
            }
            MatrixXd K = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                base, static_cast<int>(side), static_cast<int>(side));
            K = 0.5 * (K + K.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(K, Eigen::EigenvaluesOnly);
            lmin = std::min(lmin, es.eigenvalues()(0));
        }
    }
    rep.psd_violation = -lmin;
    rep.sym = rep.sym_violation <= tol.sym;
    rep.mar = rep.mar_violation <= tol.mar;
    rep.psd = rep.psd_violation <= tol.psd;
    return rep;
}

double tensor_objective(const TensorMeasure& P, const CostTensor& cost) {
    const auto marg = leading_marginal(P, 2);
    return kernels::dot(marg.data(), cost.entries.data(), marg.size());
}

double moment_objective(const MomentVector& y, const CostTensor& cost) {
    const int nv = cost.pairs();
    std::vector<double> second(static_cast<std::size_t>(nv) * nv);
    for (int a = 0; a < nv; ++a)
        for (int b = 0; b < nv; ++b) second[static_cast<std::size_t>(a) * nv + b] = y[unit_index(nv, a) + unit_index(nv, b)];
    return kernels::dot(second.data(), cost.entries.data(), second.size());
}

}  // namespace gwsos

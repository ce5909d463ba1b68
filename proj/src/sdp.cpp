#include "gwsos/sdp.hpp"

#include "gwsos/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace gwsos {

const char* to_string(SdpStatus s) {
    switch (s) {
        case SdpStatus::optimal: return "optimal";
        case SdpStatus::max_iterations: return "max_iterations";
        case SdpStatus::numerical_failure: return "numerical_failure";
        case SdpStatus::infeasible_suspected: return "infeasible_suspected";
    }
    return "unknown";
}

void SdpProblem::add_equality(SdpEquality eq) {
    for (const auto& [v, _] : eq.terms)
        if (v < 0 || v >= nvars_) throw std::invalid_argument("equality references an unknown variable");
    equalities_.push_back(std::move(eq));
}

void SdpProblem::add_block(SdpBlock block) {
    const int k = block.dim;
    auto check = [k](const Eigen::MatrixXd& M) {
        if (M.rows() != k || M.cols() != k) throw std::invalid_argument("block coefficient has the wrong size");
        if ((M - M.transpose()).cwiseAbs().maxCoeff() > 0.0)
            throw std::invalid_argument("block coefficient is not symmetric");
    };
    if (block.constant.size() == 0) block.constant = Eigen::MatrixXd::Zero(k, k);
    check(block.constant);
    for (const auto& [v, F] : block.terms) {
        if (v < 0 || v >= nvars_) throw std::invalid_argument("block references an unknown variable");
        check(F);
    }
    blocks_.push_back(std::move(block));
}

double SdpProblem::objective_at(const Eigen::VectorXd& x) const {
    return kernels::dot(objective_.data(), x.data(), static_cast<std::size_t>(nvars_));
}

double SdpProblem::equality_residual(const Eigen::VectorXd& x) const {
    double worst = 0;
    for (const auto& eq : equalities_) {
        double v = -eq.rhs;
        for (const auto& [i, a] : eq.terms) v += a * x(i);
        worst = std::max(worst, std::abs(v));
    }
    return worst;
}

Eigen::MatrixXd SdpProblem::block_value(int b, const Eigen::VectorXd& x) const {
    const SdpBlock& blk = blocks_[b];
    Eigen::MatrixXd M = blk.constant;
    for (const auto& [v, F] : blk.terms) M += x(v) * F;
    return M;
}

double SdpProblem::min_block_eigenvalue(const Eigen::VectorXd& x) const {
    double worst = std::numeric_limits<double>::infinity();
    for (int b = 0; b < static_cast<int>(blocks_.size()); ++b) {
        const Eigen::MatrixXd M = block_value(b, x);
        if (M.rows() == 1) {
            worst = std::min(worst, M(0, 0));
            continue;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
        worst = std::min(worst, es.eigenvalues()(0));
    }
    return worst;
}

nlohmann::json SdpProblem::to_json() const {
    auto mat = [](const Eigen::MatrixXd& M) {
        nlohmann::json rows = nlohmann::json::array();
        for (int i = 0; i < M.rows(); ++i) {
            std::vector<double> row(M.cols());
            for (int j = 0; j < M.cols(); ++j) row[j] = M(i, j);
            rows.push_back(row);
        }
        return rows;
    };
    nlohmann::json doc;
    doc["format"] = "lmi-v1";
    doc["nvars"] = nvars_;
    doc["objective"] = std::vector<double>(objective_.data(), objective_.data() + nvars_);
    auto& eqs = doc["equalities"] = nlohmann::json::array();
    for (const auto& eq : equalities_) {
        nlohmann::json e;
        e["rhs"] = eq.rhs;
        e["terms"] = nlohmann::json::array();
        for (const auto& [i, a] : eq.terms) e["terms"].push_back({i, a});
        eqs.push_back(e);
    }
    auto& blks = doc["blocks"] = nlohmann::json::array();
    for (const auto& blk : blocks_) {
        nlohmann::json b;
        b["dim"] = blk.dim;
        b["constant"] = mat(blk.constant);
        b["terms"] = nlohmann::json::array();
        for (const auto& [v, F] : blk.terms) b["terms"].push_back({{"var", v}, {"matrix", mat(F)}});
        blks.push_back(b);
    }
    return doc;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// A block of size >= 2 in the reduced variables: value = mat(G0 + G z).
struct DenseBlock {
    int k = 0;
    MatrixXd G;   // k*k x nz, column j = vec of coefficient j
    VectorXd G0;  // k*k
    MatrixXd Z, W, S;
    MatrixXd dZ, dW, dZp, dWp, RZ;
};

// All 1x1 blocks collected into one nonnegativity cone.
struct LinearCone {
    MatrixXd A;   // L x nz
    VectorXd a0;  // L
    VectorXd z, w, dz, dw, dzp, dwp, rz;
    int size() const { return static_cast<int>(a0.size()); }
};

Eigen::Map<const MatrixXd> as_mat(const VectorXd& v, int k) { return Eigen::Map<const MatrixXd>(v.data(), k, k); }

// Largest step t with X + t dX PSD (infinity if unbounded).
double max_step(const MatrixXd& X, const MatrixXd& dX) {
    Eigen::LLT<MatrixXd> llt(X);
    if (llt.info() != Eigen::Success) return 0.0;
    MatrixXd M = llt.matrixL().solve(dX);
    M = llt.matrixL().solve(M.transpose()).eval();
    M = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    return lmin < 0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

double max_step_linear(const VectorXd& x, const VectorXd& dx) {
    double t = std::numeric_limits<double>::infinity();
    for (int i = 0; i < x.size(); ++i)
        if (dx(i) < 0) t = std::min(t, -x(i) / dx(i));
    return t;
}

// Adjoint map: out_j = <G_j, M> accumulated.
void add_adjoint(const MatrixXd& G, const MatrixXd& M, double scale, VectorXd& out) {
    const std::size_t len = static_cast<std::size_t>(M.size());
    for (int j = 0; j < G.cols(); ++j) out(j) += scale * kernels::dot(G.col(j).data(), M.data(), len);
}

class Solver {
public:
    Solver(const SdpProblem& p, const SdpTolerances& tol) : prob_(p), tol_(tol) {}

    SdpSolution run();

private:
    bool reduce_equalities(SdpSolution& sol);
    bool build_blocks(SdpSolution& sol);
    void residuals();
    bool assemble_schur();
    void direction(double sigma_mu, bool corrector);
    double evaluate_steps(double& ap, double& ad) const;

    const SdpProblem& prob_;
    SdpTolerances tol_;
    int n_ = 0;
    int nz_ = 0;
    VectorXd x0_;
    MatrixXd N_;
    VectorXd c_;
    double cscale_ = 1.0;
    double nu_ = 0.0;
    std::vector<DenseBlock> blocks_;
    LinearCone lin_;
    VectorXd z_, dz_, rd_;
    MatrixXd H_;
    Eigen::LLT<MatrixXd> chol_;
    double g0norm_ = 0.0;
};

bool Solver::reduce_equalities(SdpSolution& sol) {
    n_ = prob_.nvars();
    const auto& eqs = prob_.equalities();
    const int m = static_cast<int>(eqs.size());
    if (m == 0) {
        x0_ = VectorXd::Zero(n_);
        N_ = MatrixXd::Identity(n_, n_);
        nz_ = n_;
        return true;
    }
    MatrixXd At = MatrixXd::Zero(n_, m);
    VectorXd b(m);
    for (int r = 0; r < m; ++r) {
        for (const auto& [i, a] : eqs[r].terms) At(i, r) += a;
        b(r) = eqs[r].rhs;
        const double nrm = At.col(r).norm();
        if (nrm == 0.0) {
            if (b(r) != 0.0) {
                sol.status = SdpStatus::infeasible_suspected;
                sol.message = "equality with no terms and nonzero right-hand side";
                return false;
            }
            continue;
        }
        At.col(r) /= nrm;
        b(r) /= nrm;
    }
    Eigen::ColPivHouseholderQR<MatrixXd> qr(At);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    MatrixXd Q = qr.householderQ();
    const VectorXd pb = qr.colsPermutation().transpose() * b;
    const MatrixXd R11 = qr.matrixR().topLeftCorner(rank, rank).template triangularView<Eigen::Upper>();
    const VectorXd u = R11.transpose().triangularView<Eigen::Lower>().solve(pb.head(rank));
    x0_ = Q.leftCols(rank) * u;
    N_ = Q.rightCols(n_ - rank);
    nz_ = n_ - rank;
    const double res = (At.transpose() * x0_ - b).cwiseAbs().maxCoeff();
    if (res > 1e-8 * (1.0 + b.cwiseAbs().maxCoeff())) {
        sol.status = SdpStatus::infeasible_suspected;
        sol.message = "equality constraints are inconsistent";
        return false;
    }
    return true;
}

bool Solver::build_blocks(SdpSolution& sol) {
    std::vector<VectorXd> lin_rows;
    std::vector<double> lin_const;
    double g0sq = 0;
    for (const auto& blk : prob_.blocks()) {
        const int k = blk.dim;
        const int kk = k * k;
        std::map<int, int> col_of;
        for (const auto& [v, _] : blk.terms) col_of.emplace(v, 0);
        int t = 0;
        for (auto& [v, c] : col_of) c = t++;
        MatrixXd F = MatrixXd::Zero(kk, t);
        MatrixXd Nsub(t, nz_);
        for (const auto& [v, c] : col_of) Nsub.row(c) = N_.row(v);
        VectorXd G0 = Eigen::Map<const VectorXd>(blk.constant.data(), kk);
        for (const auto& [v, Fi] : blk.terms) {
            F.col(col_of[v]) += Eigen::Map<const VectorXd>(Fi.data(), kk);
            G0 += x0_(v) * Eigen::Map<const VectorXd>(Fi.data(), kk);
        }
        MatrixXd G = F * Nsub;
        const double gn = G.norm();
        if (gn < 1e-14) {
            // Constant block: either satisfied or not.
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(as_mat(G0, k), Eigen::EigenvaluesOnly);
            if (es.eigenvalues()(0) < -tol_.feas) {
                sol.status = SdpStatus::infeasible_suspected;
                sol.message = "a block is constant and not positive semidefinite";
                return false;
            }
            continue;
        }
        G /= gn;
        G0 /= gn;
        g0sq += G0.squaredNorm();
        if (k == 1) {
            lin_rows.push_back(G.row(0).transpose());
            lin_const.push_back(G0(0));
            continue;
        }
        DenseBlock db;
        db.k = k;
        db.G = std::move(G);
        db.G0 = std::move(G0);
        blocks_.push_back(std::move(db));
    }
    const int L = static_cast<int>(lin_rows.size());
    lin_.A.resize(L, nz_);
    lin_.a0.resize(L);
    for (int i = 0; i < L; ++i) {
        lin_.A.row(i) = lin_rows[i].transpose();
        lin_.a0(i) = lin_const[i];
    }
    g0norm_ = std::sqrt(g0sq);
    return true;
}

void Solver::residuals() {
    for (auto& b : blocks_) {
        VectorXd v = b.G0 + b.G * z_;
        b.RZ = as_mat(v, b.k) - b.Z;
    }
    lin_.rz = lin_.A * z_ + lin_.a0 - lin_.z;
    rd_ = c_;
    for (const auto& b : blocks_) add_adjoint(b.G, b.W, -1.0, rd_);
    rd_.noalias() -= lin_.A.transpose() * lin_.w;
}

bool Solver::assemble_schur() {
    H_ = MatrixXd::Zero(nz_, nz_);
    for (auto& b : blocks_) {
        Eigen::LLT<MatrixXd> llt(b.Z);
        if (llt.info() != Eigen::Success) return false;
        b.S = llt.solve(MatrixXd::Identity(b.k, b.k));
        b.S = 0.5 * (b.S + b.S.transpose());
        MatrixXd T(b.k * b.k, nz_);
        for (int j = 0; j < nz_; ++j) {
            const MatrixXd Gj = as_mat(b.G.col(j), b.k);
            Eigen::Map<MatrixXd>(T.col(j).data(), b.k, b.k) = b.S * Gj * b.W;
        }
        H_.noalias() += b.G.transpose() * T;
    }
    if (lin_.size() > 0) {
        const VectorXd d = lin_.w.cwiseQuotient(lin_.z);
        H_.noalias() += lin_.A.transpose() * d.asDiagonal() * lin_.A;
    }
    H_ = 0.5 * (H_ + H_.transpose());
    const double scale = std::max(1.0, H_.diagonal().cwiseAbs().maxCoeff());
    for (double reg = 0.0; reg <= 1e-8 * scale; reg = reg == 0.0 ? 1e-14 * scale : reg * 100) {
        chol_.compute(reg == 0.0 ? H_ : MatrixXd(H_ + reg * MatrixXd::Identity(nz_, nz_)));
        if (chol_.info() == Eigen::Success) return true;
    }
    return false;
}

// Newton direction toward Z W = sigma_mu I, with the second-order correction if requested.
void Solver::direction(double sigma_mu, bool corrector) {
    VectorXd rhs = -rd_;
    for (auto& b : blocks_) {
        MatrixXd M = sigma_mu * b.S - b.W - b.S * b.RZ * b.W;
        if (corrector) M -= b.S * b.dZp * b.dWp;
        add_adjoint(b.G, M, 1.0, rhs);
    }
    if (lin_.size() > 0) {
        VectorXd m = (VectorXd::Constant(lin_.size(), sigma_mu) - lin_.w.cwiseProduct(lin_.z + lin_.rz)).cwiseQuotient(lin_.z);
        if (corrector) m -= lin_.dzp.cwiseProduct(lin_.dwp).cwiseQuotient(lin_.z);
        rhs.noalias() += lin_.A.transpose() * m;
    }
    dz_ = chol_.solve(rhs);
    for (auto& b : blocks_) {
        VectorXd v = b.G * dz_;
        b.dZ = as_mat(v, b.k) + b.RZ;
        MatrixXd P = b.S * b.dZ * b.W;
        if (corrector) P += b.S * b.dZp * b.dWp;
        b.dW = sigma_mu * b.S - b.W - 0.5 * (P + P.transpose());
    }
    if (lin_.size() > 0) {
        lin_.dz = lin_.A * dz_ + lin_.rz;
        VectorXd t = VectorXd::Constant(lin_.size(), sigma_mu) - lin_.w.cwiseProduct(lin_.z) - lin_.w.cwiseProduct(lin_.dz);
        if (corrector) t -= lin_.dzp.cwiseProduct(lin_.dwp);
        lin_.dw = t.cwiseQuotient(lin_.z);
    }
}

double Solver::evaluate_steps(double& ap, double& ad) const {
    ap = std::numeric_limits<double>::infinity();
    ad = ap;
    for (const auto& b : blocks_) {
        ap = std::min(ap, max_step(b.Z, b.dZ));
        ad = std::min(ad, max_step(b.W, b.dW));
    }
    if (lin_.size() > 0) {
        ap = std::min(ap, max_step_linear(lin_.z, lin_.dz));
        ad = std::min(ad, max_step_linear(lin_.w, lin_.dw));
    }
    return std::min(ap, ad);
}

SdpSolution Solver::run() {
    SdpSolution sol;
    if (!reduce_equalities(sol)) {
        sol.x = VectorXd::Zero(n_);
        return sol;
    }
    if (!build_blocks(sol)) {
        sol.x = x0_;
        return sol;
    }
    const VectorXd& cfull = prob_.objective();
    const double cconst = cfull.dot(x0_);
    c_ = N_.transpose() * cfull;
    cscale_ = c_.size() ? std::max(1e-300, c_.cwiseAbs().maxCoeff()) : 1.0;
    if (c_.size() && c_.cwiseAbs().maxCoeff() > 0) c_ /= cscale_;
    else cscale_ = 1.0;

    auto finish = [&](SdpStatus st, const VectorXd& z, double pobj, double dobj) {
        sol.x = x0_ + N_ * z;
        sol.objective_value = prob_.objective_at(sol.x);
        sol.dual_value = dobj * cscale_ + cconst;
        (void)pobj;
        sol.equality_residual = prob_.equality_residual(sol.x);
        sol.min_eigenvalue = prob_.blocks().empty() ? 0.0 : prob_.min_block_eigenvalue(sol.x);
        sol.gap = std::abs(sol.objective_value - sol.dual_value) /
                  (1.0 + std::abs(sol.objective_value) + std::abs(sol.dual_value));
        sol.status = st;
        return sol;
    };

    z_ = VectorXd::Zero(nz_);
    if (nz_ == 0) return finish(SdpStatus::optimal, z_, 0, 0);

    nu_ = lin_.size();
    for (auto& b : blocks_) {
        nu_ += b.k;
        const double xi = std::max(10.0, std::sqrt(static_cast<double>(b.k)));
        b.Z = xi * MatrixXd::Identity(b.k, b.k);
        b.W = xi * MatrixXd::Identity(b.k, b.k);
    }
    lin_.z = VectorXd::Constant(lin_.size(), 10.0);
    lin_.w = VectorXd::Constant(lin_.size(), 10.0);

    double pobj = 0, dobj = 0;
    int it = 0;
    for (;; ++it) {
        residuals();
        double zw = lin_.z.dot(lin_.w);
        double rzsq = lin_.rz.squaredNorm();
        dobj = -lin_.a0.dot(lin_.w);
        for (const auto& b : blocks_) {
            zw += (b.Z.array() * b.W.array()).sum();
            rzsq += b.RZ.squaredNorm();
            dobj -= kernels::dot(b.G0.data(), b.W.data(), b.G0.size());
        }
        pobj = c_.dot(z_);
        const double mu = zw / nu_;
        const double pinf = std::sqrt(rzsq) / (1.0 + g0norm_);
        const double dinf = rd_.norm() / (1.0 + c_.norm());
        const double relgap = std::max(std::abs(pobj - dobj), std::abs(zw)) / (1.0 + std::abs(pobj) + std::abs(dobj));
        sol.iterations = it;
        if (pinf <= tol_.feas * 0.1 && dinf <= tol_.feas && relgap <= tol_.gap) {
            finish(SdpStatus::optimal, z_, pobj, dobj);
            if (sol.equality_residual <= tol_.feas && sol.min_eigenvalue >= -tol_.feas) return sol;
        }
        if (!std::isfinite(pobj) || !std::isfinite(dobj) || z_.norm() > 1e12 || dobj > 1e12 || pobj < -1e12) {
            finish(SdpStatus::infeasible_suspected, z_, pobj, dobj);
            sol.message = "iterates diverged";
            return sol;
        }
        if (it >= tol_.max_iter) {
            finish(SdpStatus::max_iterations, z_, pobj, dobj);
            return sol;
        }
        if (!assemble_schur()) {
            finish(SdpStatus::numerical_failure, z_, pobj, dobj);
            sol.message = "factorization breakdown";
            return sol;
        }

        direction(0.0, false);
        double ap, ad;
        evaluate_steps(ap, ad);
        ap = std::min(1.0, ap);
        ad = std::min(1.0, ad);
        double zw_pred = lin_.size() ? (lin_.z + ap * lin_.dz).dot(lin_.w + ad * lin_.dw) : 0.0;
        for (const auto& b : blocks_) zw_pred += ((b.Z + ap * b.dZ).array() * (b.W + ad * b.dW).array()).sum();
        const double ratio = std::clamp(zw_pred / zw, 0.0, 1.0);
        const double sigma = std::pow(ratio, 3);

        for (auto& b : blocks_) {
            b.dZp = b.dZ;
            b.dWp = b.dW;
        }
        lin_.dzp = lin_.dz;
        lin_.dwp = lin_.dw;
        direction(sigma * mu, true);
        evaluate_steps(ap, ad);
        const double gamma = 0.9 + 0.09 * std::min(std::min(1.0, ap), std::min(1.0, ad));
        ap = std::min(1.0, gamma * ap);
        ad = std::min(1.0, gamma * ad);

        kernels::axpy(ap, dz_.data(), z_.data(), static_cast<std::size_t>(nz_));
        for (auto& b : blocks_) {
            b.Z += ap * b.dZ;
            b.W += ad * b.dW;
            b.Z = 0.5 * (b.Z + b.Z.transpose());
            b.W = 0.5 * (b.W + b.W.transpose());
        }
        if (lin_.size() > 0) {
            lin_.z += ap * lin_.dz;
            lin_.w += ad * lin_.dw;
        }
    }
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SdpTolerances& tol) {
    Solver s(problem, tol);
    return s.run();
}

}  // namespace gwsos

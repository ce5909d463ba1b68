#include "gwsos/geometry.hpp"

#include "gwsos/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gwsos {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<int> CellPartition::assignment(int npoints) const {
    std::vector<int> cell(npoints, -1);
    for (int c = 0; c < size(); ++c) {
        if (cells[c].empty()) throw InputError("partition cell " + std::to_string(c) + " is empty");
        for (int i : cells[c]) {
            if (i < 0 || i >= npoints) throw InputError("partition index " + std::to_string(i) + " out of range");
            if (cell[i] >= 0) throw InputError("point " + std::to_string(i) + " appears in two cells");
            cell[i] = c;
        }
    }
    for (int i = 0; i < npoints; ++i)
        if (cell[i] < 0) throw InputError("point " + std::to_string(i) + " is not covered by the partition");
    return cell;
}

CellPartition singleton_partition(int npoints) {
    CellPartition part;
    for (int i = 0; i < npoints; ++i) {
        part.cells.push_back({i});
        part.representatives.push_back(i);
    }
    return part;
}

CellPartition single_cell_partition(int npoints, int representative) {
    CellPartition part;
    part.cells.emplace_back();
    for (int i = 0; i < npoints; ++i) part.cells[0].push_back(i);
    part.representatives.push_back(representative);
    part.radius = std::numeric_limits<double>::infinity();
    return part;
}

CellPartition covering_partition(const MetricMeasureSpace& space, double eps) {
    const int n = space.size();
    if (n == 0) throw InputError("cannot partition an empty space");
    if (!(eps >= 0)) throw InputError("covering radius must be nonnegative");
    std::vector<int> centers{0};
    VectorXd nearest = space.dist.row(0).transpose();
    for (;;) {
        int far = -1;
        for (int i = 0; i < n; ++i)
            if (nearest(i) > eps && (far < 0 || nearest(i) > nearest(far))) far = i;
        if (far < 0) break;
        centers.push_back(far);
        nearest = nearest.cwiseMin(space.dist.row(far).transpose());
    }
    CellPartition part;
    part.cells.resize(centers.size());
    part.representatives = centers;
    part.radius = eps;
    for (int i = 0; i < n; ++i) {
        int best = 0;
        for (int c = 1; c < static_cast<int>(centers.size()); ++c)
            if (space.dist(i, centers[c]) < space.dist(i, centers[best])) best = c;
        part.cells[best].push_back(i);
    }
    return part;
}

void validate_partition(const CellPartition& part, const MetricMeasureSpace& space) {
    if (part.representatives.size() != part.cells.size())
        throw InputError("partition needs one representative per cell");
    part.assignment(space.size());
    for (int c = 0; c < part.size(); ++c) {
        const int rep = part.representatives[c];
        if (std::find(part.cells[c].begin(), part.cells[c].end(), rep) == part.cells[c].end())
            throw InputError("representative " + std::to_string(rep) + " is not in cell " + std::to_string(c));
        for (int i : part.cells[c])
            if (space.dist(i, rep) > part.radius + 1e-12) {
                std::ostringstream os;
                os << "point " << i << " lies at distance " << space.dist(i, rep) << " from its representative, above radius "
                   << part.radius;
                throw InputError(os.str());
            }
    }
}

CellPartition partition_from_json(const nlohmann::json& doc) {
    CellPartition part;
    try {
        part.cells = doc.at("cells").get<std::vector<std::vector<int>>>();
        part.representatives = doc.at("representatives").get<std::vector<int>>();
        part.radius = doc.at("radius").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("partition: ") + e.what());
    }
    return part;
}

nlohmann::json partition_to_json(const CellPartition& part) {
    return {{"cells", part.cells}, {"representatives", part.representatives}, {"radius", part.radius}};
}

VectorXd concentrate_weights(const VectorXd& weights, const CellPartition& part) {
    const auto cell = part.assignment(static_cast<int>(weights.size()));
    VectorXd out = VectorXd::Zero(part.size());
    for (int i = 0; i < weights.size(); ++i) out(cell[i]) += weights(i);
    return out;
}

MetricMeasureSpace concentrate_space(const MetricMeasureSpace& space, const CellPartition& part) {
    if (part.representatives.size() != part.cells.size())
        throw InputError("partition needs one representative per cell");
    const int k = part.size();
    MatrixXd D(k, k);
    std::vector<std::string> labels;
    for (int a = 0; a < k; ++a) {
        const int ra = part.representatives[a];
        labels.push_back(ra < static_cast<int>(space.labels.size()) ? space.labels[ra] : std::to_string(ra));
        for (int b = 0; b < k; ++b) D(a, b) = space.dist(ra, part.representatives[b]);
    }
    auto out = make_space(D, concentrate_weights(space.weights, part), labels, space.name);
    out.scale = space.scale;
    return out;
}

Coupling concentrate_coupling(const Coupling& pi, const CellPartition& partX, const CellPartition& partY) {
    const auto cx = partX.assignment(static_cast<int>(pi.rows()));
    const auto cy = partY.assignment(static_cast<int>(pi.cols()));
    Coupling out = Coupling::Zero(partX.size(), partY.size());
    for (int i = 0; i < pi.rows(); ++i)
        for (int j = 0; j < pi.cols(); ++j) out(cx[i], cy[j]) += pi(i, j);
    return out;
}

namespace {

void require_pair_tensor(const TensorMeasure& P) {
    if (P.factors.size() != 2) throw InputError("expected a tensor over X x Y atoms");
}

// Map from fine pair atoms to concentrated pair atoms.
std::vector<int> atom_map(int m, int n, const CellPartition& partX, const CellPartition& partY) {
    const auto cx = partX.assignment(m), cy = partY.assignment(n);
    std::vector<int> out(m * n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out[i * n + j] = cx[i] * partY.size() + cy[j];
    return out;
}

}  // namespace

TensorMeasure concentrate_tensor(const TensorMeasure& P, const CellPartition& partX, const CellPartition& partY) {
    require_pair_tensor(P);
    const int m = P.factors[0], n = P.factors[1], A = m * n, S = P.slots();
    const auto map = atom_map(m, n, partX, partY);
    TensorMeasure out = make_tensor(P.r, {partX.size(), partY.size()});
    const int B = out.atoms();
    for (std::size_t idx = 0; idx < P.entries.size(); ++idx) {
        auto at = tensor_atoms(idx, S, A);
        for (int& a : at) a = map[a];
        out.entries[tensor_index(at, B)] += P.entries[idx];
    }
    return out;
}

Coupling extend_coupling(const Coupling& pibar, const CellPartition& partX, const CellPartition& partY,
                         const VectorXd& mu, const VectorXd& nu) {
    const VectorXd cmu = concentrate_weights(mu, partX), cnu = concentrate_weights(nu, partY);
    if (pibar.rows() != cmu.size() || pibar.cols() != cnu.size())
        throw InputError("coupling shape does not match the partitions");
    if (coupling_marginal_error(pibar, cmu, cnu) > 1e-7)
        throw InputError("coupling marginals do not match the concentrated weights");
    const auto cx = partX.assignment(static_cast<int>(mu.size())), cy = partY.assignment(static_cast<int>(nu.size()));
    Coupling out(mu.size(), nu.size());
    for (int i = 0; i < mu.size(); ++i)
        for (int j = 0; j < nu.size(); ++j) {
            const double den = cmu(cx[i]) * cnu(cy[j]);
            out(i, j) = den > 0 ? pibar(cx[i], cy[j]) / den * mu(i) * nu(j) : 0.0;
        }
    return out;
}

TensorMeasure extend_tensor(const TensorMeasure& Pbar, const CellPartition& partX, const CellPartition& partY,
                            const VectorXd& mu, const VectorXd& nu) {
    require_pair_tensor(Pbar);
    const VectorXd cmu = concentrate_weights(mu, partX), cnu = concentrate_weights(nu, partY);
    if (Pbar.factors[0] != cmu.size() || Pbar.factors[1] != cnu.size())
        throw InputError("tensor shape does not match the partitions");
    const int m = static_cast<int>(mu.size()), n = static_cast<int>(nu.size()), A = m * n;
    const int kx = partX.size(), ky = partY.size(), B = kx * ky;
    const auto map = atom_map(m, n, partX, partY);
    std::vector<double> fine(A), coarse(B);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) fine[i * n + j] = mu(i) * nu(j);
    for (int a = 0; a < kx; ++a)
        for (int b = 0; b < ky; ++b) coarse[a * ky + b] = cmu(a) * cnu(b);
    TensorMeasure out = make_tensor(Pbar.r, {m, n});
    const int S = out.slots();
    for (std::size_t idx = 0; idx < out.entries.size(); ++idx) {
        const auto at = tensor_atoms(idx, S, A);
        double num = 1.0, den = 1.0;
        std::vector<int> cat(S);
        for (int s = 0; s < S; ++s) {
            num *= fine[at[s]];
            den *= coarse[map[at[s]]];
            cat[s] = map[at[s]];
        }
        out.entries[idx] = den > 0 ? Pbar.entries[tensor_index(cat, B)] / den * num : 0.0;
    }
    return out;
}

TensorMeasure pair_marginal(const TensorMeasure& S, int first, int second) {
    if (S.factors.size() != 3 || first < 0 || second > 2 || first >= second)
        throw InputError("pair_marginal expects a three-factor tensor and coordinates first < second");
    const int l = S.factors[0], m = S.factors[1], n = S.factors[2], A = l * m * n;
    const int f1 = S.factors[first], f2 = S.factors[second];
    TensorMeasure out = make_tensor(S.r, {f1, f2});
    const int B = f1 * f2, slots = S.slots();
    std::vector<int> map(A);
    for (int x = 0; x < l; ++x)
        for (int y = 0; y < m; ++y)
            for (int z = 0; z < n; ++z) {
                const int c[3] = {x, y, z};
                map[(x * m + y) * n + z] = c[first] * f2 + c[second];
            }
    for (std::size_t idx = 0; idx < S.entries.size(); ++idx) {
        if (S.entries[idx] == 0.0) continue;
        auto at = tensor_atoms(idx, slots, A);
        for (int& a : at) a = map[a];
        out.entries[tensor_index(at, B)] += S.entries[idx];
    }
    return out;
}

namespace {

// Y^{2r} marginal of a pair tensor; `y_is_first` selects which factor is Y.
std::vector<double> y_marginal(const TensorMeasure& P, bool y_is_first) {
    const int f0 = P.factors[0], f1 = P.factors[1], A = f0 * f1, S = P.slots();
    const int ny = y_is_first ? f0 : f1;
    std::size_t size = 1;
    for (int s = 0; s < S; ++s) size *= static_cast<std::size_t>(ny);
    std::vector<double> out(size, 0.0);
    for (std::size_t idx = 0; idx < P.entries.size(); ++idx) {
        auto at = tensor_atoms(idx, S, A);
        for (int& a : at) a = y_is_first ? a / f1 : a % f1;
        out[tensor_index(at, ny)] += P.entries[idx];
    }
    return out;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double w = 0;
    for (std::size_t k = 0; k < a.size(); ++k) w = std::max(w, std::abs(a[k] - b[k]));
    return w;
}

}  // namespace

GlueResult glue(const TensorMeasure& P, const TensorMeasure& Q, const VectorXd& nu) {
    require_pair_tensor(P);
    require_pair_tensor(Q);
    if (P.r != Q.r) throw InputError("glue: tensors have different levels");
    const int l = P.factors[0], m = P.factors[1], n = Q.factors[1];
    if (Q.factors[0] != m || nu.size() != m) throw InputError("glue: Y dimensions do not match");
    const int S = P.slots();
    const auto py = y_marginal(P, false), qy = y_marginal(Q, true);
    const double mismatch = max_abs_diff(py, qy);
    if (mismatch > 1e-7) {
        std::ostringstream os;
        os << "glue: Y marginals of P and Q differ by " << mismatch;
        throw InputError(os.str());
    }
    // nu^{2r} on Y-configurations.
    std::vector<double> nuprod(py.size());
    for (std::size_t k = 0; k < nuprod.size(); ++k) {
        double w = 1.0;
        for (int y : tensor_atoms(k, S, m)) w *= nu(y);
        nuprod[k] = w;
    }
    GlueResult res;
    for (double w : nuprod)
        if (w == 0.0) ++res.zero_slices;
    res.S.tensor = make_tensor(P.r, {l, m, n});
    const int A = l * m * n, AP = l * m, AQ = m * n;
    std::vector<int> pa(S), qa(S), ya(S);
    for (std::size_t idx = 0; idx < res.S.tensor.entries.size(); ++idx) {
        const auto at = tensor_atoms(idx, S, A);
        for (int s = 0; s < S; ++s) {
            const int x = at[s] / (m * n), y = (at[s] / n) % m, z = at[s] % n;
            pa[s] = x * m + y;
            qa[s] = y * n + z;
            ya[s] = y;
        }
        const double den = nuprod[tensor_index(ya, m)];
        res.S.tensor.entries[idx] =
            den > 0 ? P.entries[tensor_index(pa, AP)] * Q.entries[tensor_index(qa, AQ)] / den : 0.0;
    }
    res.S.xy = pair_marginal(res.S.tensor, 0, 1);
    res.S.yz = pair_marginal(res.S.tensor, 1, 2);
    res.R = pair_marginal(res.S.tensor, 0, 2);
    res.xy_error = max_abs_diff(res.S.xy.entries, P.entries);
    res.yz_error = max_abs_diff(res.S.yz.entries, Q.entries);
    return res;
}

PseudoMetricReport pseudo_metric_check(const std::vector<MetricMeasureSpace>& spaces, int r, double p, double q,
                                       const PseudoMetricOptions& opts) {
    const int k = static_cast<int>(spaces.size());
    PseudoMetricReport rep;
    rep.r = r;
    rep.p = p;
    rep.q = q;
    rep.value = MatrixXd::Zero(k, k);
    rep.delta = MatrixXd::Zero(k, k);
    std::vector<std::string> issues(static_cast<std::size_t>(k) * k);
    parallel_for(static_cast<std::size_t>(k) * k, opts.jobs, [&](std::size_t t) {
        const int i = static_cast<int>(t) / k, j = static_cast<int>(t) % k;
        const std::string where = "(" + std::to_string(i) + "," + std::to_string(j) + "): ";
        try {
            const auto lb = gw_lower_bound(spaces[i], spaces[j], r, p, q, opts.relaxation, opts.solver);
            rep.value(i, j) = lb.value;
            rep.delta(i, j) = lb.delta;
            if (lb.solution.status != SdpStatus::optimal) issues[t] = where + to_string(lb.solution.status);
        } catch (const NumericalError& e) {
            issues[t] = where + e.what();
        }
    });
    for (auto& s : issues)
        if (!s.empty()) rep.solver_issues.push_back(s);
    for (int i = 0; i < k; ++i) {
        rep.identity_worst = std::max(rep.identity_worst, rep.delta(i, i));
        for (int j = 0; j < k; ++j) {
            rep.symmetry_worst = std::max(rep.symmetry_worst, std::abs(rep.delta(i, j) - rep.delta(j, i)));
            rep.nonneg_worst = std::max(rep.nonneg_worst, -rep.value(i, j));
        }
    }
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            for (int l = 0; l < k; ++l) {
                if (i == j || j == l || i == l) continue;
                ++rep.triples;
                const double excess = rep.delta(i, l) - rep.delta(i, j) - rep.delta(j, l);
                rep.triangle_worst = std::max(rep.triangle_worst, excess);
            }
    rep.identity = rep.identity_worst <= opts.identity_tol;
    rep.symmetry = rep.symmetry_worst <= opts.symmetry_tol;
    rep.nonneg = rep.nonneg_worst <= opts.nonneg_tol;
    rep.triangle = rep.triangle_worst <= opts.triangle_tol;
    return rep;
}

}  // namespace gwsos

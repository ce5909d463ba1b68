#include "gwsos/polymoment.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <string>

namespace gwsos {

MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
    MultiIndex c(a);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
    return c;
}

MultiIndex unit_index(int nvars, int var) {
    MultiIndex a(nvars, 0);
    a[var] = 1;
    return a;
}

std::size_t monomial_count(int nvars, int maxdeg) {
    // C(nvars + maxdeg, maxdeg) built incrementally; each partial product is itself a binomial.
    const std::size_t kMax = std::numeric_limits<std::size_t>::max();
    std::size_t c = 1;
    for (int k = 1; k <= maxdeg; ++k) {
        const std::size_t mult = static_cast<std::size_t>(nvars + k);
        if (c > kMax / mult) return kMax;
        c = c * mult / static_cast<std::size_t>(k);
    }
    return c;
}

namespace {

void fill_degree(int pos, int remaining, MultiIndex& cur, std::vector<MultiIndex>& out) {
    const int last = static_cast<int>(cur.size()) - 1;
    if (pos == last) {
        cur[pos] = remaining;
        out.push_back(cur);
        cur[pos] = 0;
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        cur[pos] = e;
        fill_degree(pos + 1, remaining - e, cur, out);
    }
    cur[pos] = 0;
}

}  // namespace

namespace {

void check_cap(int nvars, int maxdeg, std::size_t cap) {
    if (monomial_count(nvars, maxdeg) > cap)
        throw SizeCapError("monomial basis of " + std::to_string(nvars) + " variables up to degree " +
                           std::to_string(maxdeg) + " exceeds the cap of " + std::to_string(cap));
}

}  // namespace

std::vector<MultiIndex> enumerate_multiindices(int nvars, int maxdeg, std::size_t cap) {
    if (nvars < 1 || maxdeg < 0) throw std::invalid_argument("enumerate_multiindices: need nvars >= 1, maxdeg >= 0");
    check_cap(nvars, maxdeg, cap);
    const std::size_t count = monomial_count(nvars, maxdeg);
    std::vector<MultiIndex> out;
    out.reserve(count);
    MultiIndex cur(nvars, 0);
    for (int d = 0; d <= maxdeg; ++d) fill_degree(0, d, cur, out);
    return out;
}

std::size_t MultiIndexHash::operator()(const MultiIndex& a) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (int e : a) {
        h ^= static_cast<std::size_t>(e) + 0x9e3779b97f4a7c15ull;
        h *= 1099511628211ull;
    }
    return h;
}

MonomialBasis::MonomialBasis(int nvars, int maxdeg, std::size_t cap)
    : nvars_(nvars), maxdeg_(maxdeg), indices_(enumerate_multiindices(nvars, maxdeg, cap)) {
    offsets_.assign(maxdeg + 2, 0);
    lookup_.reserve(indices_.size());
    for (int pos = 0; pos < size(); ++pos) {
        lookup_.emplace(indices_[pos], pos);
        offsets_[degree(indices_[pos]) + 1] = pos + 1;
    }
}

int MonomialBasis::find(const MultiIndex& a) const {
    auto it = lookup_.find(a);
    return it == lookup_.end() ? -1 : it->second;
}

std::shared_ptr<const MonomialBasis> monomial_basis(int nvars, int maxdeg, std::size_t cap) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const MonomialBasis>> cache;
    check_cap(nvars, maxdeg, cap);
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{nvars, maxdeg}];
    if (!slot) slot = std::make_shared<const MonomialBasis>(nvars, maxdeg, cap);
    return slot;
}

Polynomial Polynomial::constant(int nvars, double c) {
    Polynomial p(nvars);
    p.add_term(MultiIndex(nvars, 0), c);
    return p;
}

Polynomial Polynomial::variable(int nvars, int var) {
    Polynomial p(nvars);
    p.add_term(unit_index(nvars, var), 1.0);
    return p;
}

Polynomial Polynomial::monomial(const MultiIndex& a, double c) {
    Polynomial p(static_cast<int>(a.size()));
    p.add_term(a, c);
    return p;
}

int Polynomial::degree() const {
    int d = 0;
    for (const auto& [a, _] : terms_) d = std::max(d, gwsos::degree(a));
    return d;
}

void Polynomial::add_term(const MultiIndex& a, double c) {
    auto it = terms_.find(a);
    if (it == terms_.end()) {
        if (c != 0.0) terms_.emplace(a, c);
        return;
    }
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    Polynomial r(*this);
    for (const auto& [a, c] : o.terms_) r.add_term(a, c);
    return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& o) const {
    Polynomial r(nvars_);
    for (const auto& [a, c] : terms_)
        for (const auto& [b, d] : o.terms_) r.add_term(a + b, c * d);
    return r;
}

Polynomial Polynomial::operator*(double s) const {
    Polynomial r(nvars_);
    for (const auto& [a, c] : terms_) r.add_term(a, c * s);
    return r;
}

double Polynomial::evaluate(const Eigen::VectorXd& x) const {
    double total = 0;
    for (const auto& [a, c] : terms_) {
        double v = c;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i]) v *= std::pow(x(static_cast<int>(i)), a[i]);
        total += v;
    }
    return total;
}

MomentVector::MomentVector(int nvars, int order_)
    : basis(monomial_basis(nvars, 2 * order_)), order(order_), values(Eigen::VectorXd::Zero(basis->size())) {}

double MomentVector::operator[](const MultiIndex& a) const {
    const int pos = basis->find(a);
    if (pos < 0) throw std::out_of_range("moment index beyond degree 2r");
    return values(pos);
}

double& MomentVector::at(const MultiIndex& a) {
    const int pos = basis->find(a);
    if (pos < 0) throw std::out_of_range("moment index beyond degree 2r");
    return values(pos);
}

MomentVector dirac_moments(const Eigen::VectorXd& point, int order) {
    return discrete_moments({point}, {1.0}, order);
}

MomentVector discrete_moments(const std::vector<Eigen::VectorXd>& points, const std::vector<double>& w, int order) {
    MomentVector y(static_cast<int>(points.at(0).size()), order);
    const auto& basis = *y.basis;
    for (std::size_t k = 0; k < points.size(); ++k) {
        // Each monomial extends a lower one by a single variable: reuse graded order.
        Eigen::VectorXd mono(basis.size());
        mono(0) = 1.0;
        for (int pos = 1; pos < basis.size(); ++pos) {
            const MultiIndex& a = basis[pos];
            int var = 0;
            while (a[var] == 0) ++var;
            MultiIndex lower = a;
            --lower[var];
            mono(pos) = mono(basis.find(lower)) * points[k](var);
        }
        y.values += w[k] * mono;
    }
    return y;
}

double riesz_apply(const MomentVector& y, const Polynomial& f) {
    double total = 0;
    for (const auto& [a, c] : f.terms()) {
        if (degree(a) > 2 * y.order) throw std::out_of_range("riesz_apply: term degree exceeds 2r");
        total += c * y[a];
    }
    return total;
}

namespace {

Eigen::MatrixXd shifted_matrix(const MomentVector& y, const Polynomial& g, int row_begin, int row_end) {
    const auto& basis = *y.basis;
    const int k = row_end - row_begin;
    Eigen::MatrixXd M(k, k);
    for (int a = 0; a < k; ++a)
        for (int b = a; b < k; ++b) {
            const MultiIndex ab = basis[row_begin + a] + basis[row_begin + b];
            double v = 0;
            for (const auto& [gamma, coeff] : g.terms()) {
                const int pos = basis.find(ab + gamma);
                if (pos < 0) throw std::out_of_range("localizing entry exceeds degree 2r");
                v += coeff * y.values(pos);
            }
            M(a, b) = M(b, a) = v;
        }
    return M;
}

}  // namespace

Eigen::MatrixXd moment_matrix(const MomentVector& y, int r) {
    if (r > y.order) throw std::out_of_range("moment_matrix: r exceeds moment order");
    return shifted_matrix(y, Polynomial::constant(y.nvars(), 1.0), 0, y.basis->degree_end(r));
}

Eigen::MatrixXd localizing_matrix(const MomentVector& y, const Polynomial& g, int r) {
    const int dg = g.degree();
    const int k = r - (dg + 1) / 2;
    if (k < 0 || dg + 2 * k > 2 * y.order) throw std::out_of_range("localizing_matrix: degree overflow");
    return shifted_matrix(y, g, 0, y.basis->degree_end(k));
}

Eigen::MatrixXd truncated_matrix(const MomentVector& y, const Polynomial& e, int r) {
    if (e.terms().size() != 1) throw std::invalid_argument("truncated_matrix: expected a single monomial");
    const MultiIndex& ex = e.terms().begin()->first;
    for (int v : ex)
        if (v > 1) throw std::invalid_argument("truncated_matrix: monomial must have 0/1 exponents");
    const int de = degree(ex);
    if (de % 2) throw std::invalid_argument("truncated_matrix: monomial degree must be even");
    const int k = r - de / 2;
    if (k < 0 || r > y.order) throw std::out_of_range("truncated_matrix: degree overflow");
    return shifted_matrix(y, Polynomial::monomial(ex, 1.0), y.basis->degree_begin(k), y.basis->degree_end(k));
}

}  // namespace gwsos

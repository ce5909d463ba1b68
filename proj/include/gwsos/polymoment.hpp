#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace gwsos {

using MultiIndex = std::vector<int>;

inline int degree(const MultiIndex& a) {
    int d = 0;
    for (int e : a) d += e;
    return d;
}

MultiIndex operator+(const MultiIndex& a, const MultiIndex& b);
MultiIndex unit_index(int nvars, int var);

// Thrown when an enumeration would exceed the configured size cap.
class SizeCapError : public std::length_error {
public:
    using std::length_error::length_error;
};

constexpr std::size_t kDefaultMonomialCap = 1000000;

// C(nvars + maxdeg, maxdeg), saturating at SIZE_MAX.
std::size_t monomial_count(int nvars, int maxdeg);

// All exponent vectors of total degree <= maxdeg in graded lexicographic order.
std::vector<MultiIndex> enumerate_multiindices(int nvars, int maxdeg, std::size_t cap = kDefaultMonomialCap);

struct MultiIndexHash {
    std::size_t operator()(const MultiIndex& a) const noexcept;
};

// Graded-lex monomial basis with O(1) position lookup.
class MonomialBasis {
public:
    MonomialBasis(int nvars, int maxdeg, std::size_t cap = kDefaultMonomialCap);

    int nvars() const { return nvars_; }
    int max_degree() const { return maxdeg_; }
    int size() const { return static_cast<int>(indices_.size()); }
    const MultiIndex& operator[](int pos) const { return indices_[pos]; }
    const std::vector<MultiIndex>& indices() const { return indices_; }

    // Position of `a`, or -1 if its degree exceeds max_degree().
    int find(const MultiIndex& a) const;
    // Positions with degree exactly d occupy [degree_begin(d), degree_begin(d+1)).
    int degree_begin(int d) const { return offsets_[d]; }
    int degree_end(int d) const { return offsets_[d + 1]; }

private:
    int nvars_;
    int maxdeg_;
    std::vector<MultiIndex> indices_;
    std::vector<int> offsets_;
    std::unordered_map<MultiIndex, int, MultiIndexHash> lookup_;
};

// Shared, process-wide cache keyed by (nvars, maxdeg).
std::shared_ptr<const MonomialBasis> monomial_basis(int nvars, int maxdeg, std::size_t cap = kDefaultMonomialCap);

class Polynomial {
public:
    explicit Polynomial(int nvars = 0) : nvars_(nvars) {}
    static Polynomial constant(int nvars, double c);
    static Polynomial variable(int nvars, int var);
    static Polynomial monomial(const MultiIndex& a, double c = 1.0);

    int nvars() const { return nvars_; }
    int degree() const;
    const std::map<MultiIndex, double>& terms() const { return terms_; }
    void add_term(const MultiIndex& a, double c);

    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator*(double s) const;

    double evaluate(const Eigen::VectorXd& x) const;

private:
    int nvars_;
    std::map<MultiIndex, double> terms_;
};

// Pseudo-moments indexed by the graded-lex basis of degree <= 2 * order.
struct MomentVector {
    std::shared_ptr<const MonomialBasis> basis;
    int order = 0;
    Eigen::VectorXd values;

    MomentVector() = default;
    MomentVector(int nvars, int order);

    int nvars() const { return basis->nvars(); }
    double operator[](const MultiIndex& a) const;
    double& at(const MultiIndex& a);
};

// Moments of the Dirac measure at `point`.
MomentVector dirac_moments(const Eigen::VectorXd& point, int order);
// Moments of the discrete measure sum_k w_k delta_{points_k}.
MomentVector discrete_moments(const std::vector<Eigen::VectorXd>& points, const std::vector<double>& w, int order);

double riesz_apply(const MomentVector& y, const Polynomial& f);

// Rows of degree <= r, entries y_{a+b}.
Eigen::MatrixXd moment_matrix(const MomentVector& y, int r);
// Rows of degree <= r - ceil(deg g / 2), entries sum_c g_c y_{a+b+c}.
Eigen::MatrixXd localizing_matrix(const MomentVector& y, const Polynomial& g, int r);
// Rows of degree exactly r - deg(e)/2 for a squarefree even-degree monomial e.
Eigen::MatrixXd truncated_matrix(const MomentVector& y, const Polynomial& e, int r);

}  // namespace gwsos

#include "gwsos/mmspace.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace gwsos {

namespace {

std::string at(int i, int j) {
    std::ostringstream os;
    os << "(" << i << "," << j << ")";
    return os.str();
}

}  // namespace

void validate_space(const MetricMeasureSpace& s, const SpaceTolerances& tol) {
    const int n = static_cast<int>(s.weights.size());
    if (n == 0) throw InputError("space has no points");
    if (s.dist.rows() != n || s.dist.cols() != n) {
        std::ostringstream os;
        os << "dist is " << s.dist.rows() << "x" << s.dist.cols() << " but there are " << n << " weights";
        throw InputError(os.str());
    }
    if (static_cast<int>(s.labels.size()) != n) throw InputError("labels length does not match weights length");
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double d = s.dist(i, j);
            if (!std::isfinite(d)) throw InputError("non-finite distance at " + at(i, j));
            if (d < 0) throw InputError("negative distance at " + at(i, j));
            if (i == j && d != 0.0) throw InputError("nonzero diagonal at " + at(i, i));
            if (std::abs(d - s.dist(j, i)) > tol.symmetry) throw InputError("asymmetry at " + at(std::min(i, j), std::max(i, j)));
        }
    }
    const double slack = tol.triangle * std::max(1.0, s.diameter());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                if (s.dist(i, j) > s.dist(i, k) + s.dist(k, j) + slack) {
                    std::ostringstream os;
                    os << "triangle inequality violated at (" << i << "," << j << ") via " << k;
                    throw InputError(os.str());
                }
    double total = 0;
    for (int i = 0; i < n; ++i) {
        const double w = s.weights(i);
        if (!std::isfinite(w) || w < 0) throw InputError("negative or non-finite weight at index " + std::to_string(i));
        total += w;
    }
    if (std::abs(total - 1.0) > tol.weight_sum) {
        std::ostringstream os;
        os.precision(17);
        os << "weights sum to " << total << ", not 1";
        throw InputError(os.str());
    }
}

MetricMeasureSpace make_space(const Eigen::MatrixXd& dist, const Eigen::VectorXd& weights,
                              std::vector<std::string> labels, std::string name, const SpaceTolerances& tol) {
    MetricMeasureSpace s;
    s.name = std::move(name);
    s.dist = dist;
    s.weights = weights;
    if (labels.empty())
        for (int i = 0; i < weights.size(); ++i) labels.push_back(std::to_string(i));
    s.labels = std::move(labels);
    validate_space(s, tol);
    s.weights /= s.weights.sum();
    for (int i = 0; i < s.size(); ++i)
        if (s.weights(i) == 0.0) s.zero_weight.push_back(i);
    return s;
}

MetricMeasureSpace load_space(const nlohmann::json& doc, std::vector<std::string>* warnings,
                              const SpaceTolerances& tol) {
    if (!doc.is_object()) throw InputError("space document must be an object");
    static const std::set<std::string> known = {"labels", "dist", "weights", "name"};
    for (const auto& [key, _] : doc.items())
        if (!known.count(key) && warnings) warnings->push_back("ignoring unknown field '" + key + "'");
    for (const char* f : {"labels", "dist", "weights"})
        if (!doc.contains(f)) throw InputError(std::string("missing field '") + f + "'");

    const auto& jl = doc["labels"];
    const auto& jd = doc["dist"];
    const auto& jw = doc["weights"];
    if (!jl.is_array()) throw InputError("field 'labels' must be an array");
    if (!jd.is_array()) throw InputError("field 'dist' must be an array of arrays");
    if (!jw.is_array()) throw InputError("field 'weights' must be an array");

    const int n = static_cast<int>(jw.size());
    std::vector<std::string> labels;
    for (const auto& l : jl) {
        if (l.is_string()) labels.push_back(l.get<std::string>());
        else if (l.is_number()) labels.push_back(l.dump());
        else throw InputError("field 'labels' must contain strings");
    }
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) {
        if (!jw[i].is_number()) throw InputError("field 'weights' entry " + std::to_string(i) + " is not a number");
        w(i) = jw[i].get<double>();
    }
    if (static_cast<int>(jd.size()) != n) throw InputError("field 'dist' must have one row per weight");
    Eigen::MatrixXd d(n, n);
    for (int i = 0; i < n; ++i) {
        if (!jd[i].is_array() || static_cast<int>(jd[i].size()) != n)
            throw InputError("field 'dist' row " + std::to_string(i) + " has wrong length");
        for (int j = 0; j < n; ++j) {
            if (!jd[i][j].is_number()) throw InputError("field 'dist' entry " + at(i, j) + " is not a number");
            d(i, j) = jd[i][j].get<double>();
        }
    }
    std::string name = doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>() : "";
    return make_space(d, w, std::move(labels), std::move(name), tol);
}

MetricMeasureSpace load_space_file(const std::string& path, std::vector<std::string>* warnings,
                                   const SpaceTolerances& tol) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    return load_space(doc, warnings, tol);
}

nlohmann::json space_to_json(const MetricMeasureSpace& s) {
    nlohmann::json doc;
    if (!s.name.empty()) doc["name"] = s.name;
    doc["labels"] = s.labels;
    auto& d = doc["dist"] = nlohmann::json::array();
    for (int i = 0; i < s.size(); ++i) {
        std::vector<double> row(s.size());
        for (int j = 0; j < s.size(); ++j) row[j] = s.dist(i, j);
        d.push_back(row);
    }
    doc["weights"] = std::vector<double>(s.weights.data(), s.weights.data() + s.size());
    return doc;
}

MetricMeasureSpace normalize_diameter(const MetricMeasureSpace& space) {
    MetricMeasureSpace out = space;
    const double diam = space.diameter();
    if (diam > 0) {
        out.dist = space.dist / diam;
        out.scale = space.scale * diam;
    }
    return out;
}

CostTensor build_cost_tensor(const MetricMeasureSpace& X, const MetricMeasureSpace& Y, double p, double q) {
    if (!(p >= 1.0) || !(q >= 1.0)) throw InputError("cost exponents p and q must be >= 1");
    CostTensor c;
    c.m = X.size();
    c.n = Y.size();
    c.p = p;
    c.q = q;
    const int mn = c.m * c.n;
    c.entries.assign(static_cast<std::size_t>(mn) * mn, 0.0);
    for (int i = 0; i < c.m; ++i)
        for (int j = 0; j < c.n; ++j)
            for (int k = 0; k < c.m; ++k)
                for (int l = 0; l < c.n; ++l) {
                    const double gap = std::abs(std::pow(X.dist(i, k), q) - std::pow(Y.dist(j, l), q));
                    c.entries[c.pair_offset(i * c.n + j, k * c.n + l)] = std::pow(gap, p);
                }
    return c;
}

}  // namespace gwsos

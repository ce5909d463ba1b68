#include "gwsos/sampling.hpp"

#include "gwsos/parallel.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace gwsos {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* to_string(GroundKind k) {
    switch (k) {
        case GroundKind::unit_interval_uniform: return "unit_interval_uniform";
        case GroundKind::unit_circle_uniform: return "unit_circle_uniform";
        case GroundKind::finite: return "finite";
        case GroundKind::mixture: return "mixture";
    }
    return "unknown";
}

GroundDistribution GroundDistribution::interval(double lo, double hi) {
    GroundDistribution d;
    d.kind = GroundKind::unit_interval_uniform;
    d.lo = lo;
    d.hi = hi;
    return d;
}

GroundDistribution GroundDistribution::circle() {
    GroundDistribution d;
    d.kind = GroundKind::unit_circle_uniform;
    return d;
}

GroundDistribution GroundDistribution::finite(const MetricMeasureSpace& space) {
    GroundDistribution d;
    d.kind = GroundKind::finite;
    d.space = space;
    return d;
}

GroundDistribution GroundDistribution::mixture(std::vector<GroundDistribution> components, std::vector<double> weights) {
    GroundDistribution d;
    d.kind = GroundKind::mixture;
    d.components = std::move(components);
    d.mixture_weights = std::move(weights);
    return d;
}

GroundKind GroundDistribution::ground() const {
    if (kind != GroundKind::mixture) return kind;
    if (components.empty()) throw InputError("mixture has no components");
    return components.front().ground();
}

namespace {

const MetricMeasureSpace& ground_space(const GroundDistribution& d) {
    return d.kind == GroundKind::mixture ? ground_space(d.components.front()) : d.space;
}

}  // namespace

double GroundDistribution::distance(double a, double b) const {
    switch (ground()) {
        case GroundKind::unit_interval_uniform: return std::abs(a - b);
        case GroundKind::unit_circle_uniform: {
            const double t = std::abs(a - b);
            return 2.0 * std::min(t, 1.0 - t);
        }
        default: return ground_space(*this).dist(static_cast<int>(a), static_cast<int>(b));
    }
}

double GroundDistribution::draw(std::mt19937_64& rng) const {
    switch (kind) {
        case GroundKind::unit_interval_uniform: return std::uniform_real_distribution<double>(lo, hi)(rng);
        case GroundKind::unit_circle_uniform: return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        case GroundKind::finite: {
            std::discrete_distribution<int> pick(space.weights.data(), space.weights.data() + space.weights.size());
            return pick(rng);
        }
        case GroundKind::mixture: {
            std::discrete_distribution<int> pick(mixture_weights.begin(), mixture_weights.end());
            return components[pick(rng)].draw(rng);
        }
    }
    return 0.0;
}

void validate_ground(const GroundDistribution& d) {
    switch (d.kind) {
        case GroundKind::unit_interval_uniform:
            if (!(0.0 <= d.lo && d.lo < d.hi && d.hi <= 1.0))
                throw InputError("interval support must satisfy 0 <= lo < hi <= 1");
            return;
        case GroundKind::unit_circle_uniform: return;
        case GroundKind::finite:
            validate_space(d.space);
            if (d.space.diameter() > 1.0 + 1e-12) throw InputError("finite ground space must have diameter <= 1");
            return;
        case GroundKind::mixture: {
            if (d.components.empty()) throw InputError("mixture has no components");
            if (d.components.size() != d.mixture_weights.size())
                throw InputError("mixture needs one weight per component");
            double total = 0;
            for (double w : d.mixture_weights) {
                if (!(w >= 0)) throw InputError("mixture weights must be nonnegative");
                total += w;
            }
            if (!(total > 0)) throw InputError("mixture weights must not all be zero");
            const GroundKind g = d.components.front().ground();
            for (const auto& c : d.components) {
                validate_ground(c);
                if (c.ground() != g) throw InputError("mixture components live on different ground sets");
                if (g == GroundKind::finite && ground_space(c).dist != ground_space(d.components.front()).dist)
                    throw InputError("finite mixture components must share one distance matrix");
            }
            return;
        }
    }
}

GroundDistribution ground_from_json(const nlohmann::json& doc) {
    try {
        const std::string kind = doc.at("kind").get<std::string>();
        if (kind == "unit_interval_uniform")
            return GroundDistribution::interval(doc.value("lo", 0.0), doc.value("hi", 1.0));
        if (kind == "unit_circle_uniform") return GroundDistribution::circle();
        if (kind == "finite") return GroundDistribution::finite(load_space(doc.at("space")));
        if (kind == "mixture") {
            std::vector<GroundDistribution> comps;
            for (const auto& c : doc.at("components")) comps.push_back(ground_from_json(c));
            return GroundDistribution::mixture(std::move(comps), doc.at("weights").get<std::vector<double>>());
        }
        throw InputError("ground: unknown kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("ground: ") + e.what());
    }
}

nlohmann::json ground_to_json(const GroundDistribution& d) {
    nlohmann::json j = {{"kind", to_string(d.kind)}};
    switch (d.kind) {
        case GroundKind::unit_interval_uniform:
            j["lo"] = d.lo;
            j["hi"] = d.hi;
            break;
        case GroundKind::unit_circle_uniform: break;
        case GroundKind::finite: j["space"] = space_to_json(d.space); break;
        case GroundKind::mixture: {
            j["components"] = nlohmann::json::array();
            for (const auto& c : d.components) j["components"].push_back(ground_to_json(c));
            j["weights"] = d.mixture_weights;
            break;
        }
    }
    return j;
}

namespace {

MetricMeasureSpace space_on(const GroundDistribution& d, const std::vector<double>& coords, const VectorXd& w,
                            std::vector<std::string> labels = {}) {
    const int k = static_cast<int>(coords.size());
    MatrixXd D(k, k);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) D(a, b) = a == b ? 0.0 : d.distance(coords[a], coords[b]);
    return make_space(D, w, std::move(labels));
}

// Mass that a distribution puts on each grid cell of the unit interval.
void interval_masses(const GroundDistribution& d, double scale, const std::vector<double>& edges, VectorXd& out) {
    if (d.kind == GroundKind::mixture) {
        const double total = std::accumulate(d.mixture_weights.begin(), d.mixture_weights.end(), 0.0);
        for (std::size_t c = 0; c < d.components.size(); ++c)
            interval_masses(d.components[c], scale * d.mixture_weights[c] / total, edges, out);
        return;
    }
    for (int i = 0; i < out.size(); ++i) {
        const double a = std::max(edges[i], d.lo), b = std::min(edges[i + 1], d.hi);
        if (b > a) out(i) += scale * (b - a) / (d.hi - d.lo);
    }
}

VectorXd finite_weights(const GroundDistribution& d) {
    if (d.kind != GroundKind::mixture) return d.space.weights;
    const double total = std::accumulate(d.mixture_weights.begin(), d.mixture_weights.end(), 0.0);
    VectorXd w = VectorXd::Zero(ground_space(d).size());
    for (std::size_t c = 0; c < d.components.size(); ++c) w += d.mixture_weights[c] / total * finite_weights(d.components[c]);
    return w;
}

}  // namespace

DiscreteMeasure discretize(const GroundDistribution& dist, int grid) {
    validate_ground(dist);
    if (grid < 2) throw InputError("discretization grid needs at least 2 points");
    DiscreteMeasure out;
    switch (dist.ground()) {
        case GroundKind::unit_interval_uniform: {
            std::vector<double> edges(grid + 1);
            for (int i = 0; i < grid; ++i) out.coords.push_back(static_cast<double>(i) / (grid - 1));
            edges[0] = 0.0;
            edges[grid] = 1.0;
            for (int i = 1; i < grid; ++i) edges[i] = 0.5 * (out.coords[i - 1] + out.coords[i]);
            VectorXd w = VectorXd::Zero(grid);
            interval_masses(dist, 1.0, edges, w);
            out.space = space_on(dist, out.coords, w);
            break;
        }
        case GroundKind::unit_circle_uniform: {
            for (int i = 0; i < grid; ++i) out.coords.push_back(static_cast<double>(i) / grid);
            out.space = space_on(dist, out.coords, VectorXd::Constant(grid, 1.0 / grid));
            break;
        }
        default: {
            const auto& sp = ground_space(dist);
            for (int i = 0; i < sp.size(); ++i) out.coords.push_back(i);
            out.space = make_space(sp.dist, finite_weights(dist), sp.labels, sp.name);
            break;
        }
    }
    return out;
}

std::vector<double> draw_points(const GroundDistribution& dist, int n, std::uint64_t seed) {
    validate_ground(dist);
    if (n < 1) throw InputError("sample size must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<double> out(n);
    for (auto& x : out) x = dist.draw(rng);
    return out;
}

DiscreteMeasure empirical_measure(const GroundDistribution& dist, const std::vector<double>& draws) {
    if (draws.empty()) throw InputError("empirical measure needs at least one draw");
    std::map<double, int> counts;
    for (double x : draws) ++counts[x];
    DiscreteMeasure out;
    VectorXd w(static_cast<int>(counts.size()));
    std::vector<std::string> labels;
    const bool finite = dist.ground() == GroundKind::finite;
    int k = 0;
    for (const auto& [x, c] : counts) {
        out.coords.push_back(x);
        w(k++) = static_cast<double>(c) / static_cast<double>(draws.size());
        if (finite) labels.push_back(ground_space(dist).labels.at(static_cast<int>(x)));
    }
    out.space = space_on(dist, out.coords, w, labels);
    return out;
}

MetricMeasureSpace sample_empirical(const GroundDistribution& dist, int n, std::uint64_t seed) {
    return empirical_measure(dist, draw_points(dist, n, seed)).space;
}

std::vector<int> DyadicPartition::counts() const {
    std::vector<int> out;
    for (const auto& lvl : levels) out.push_back(static_cast<int>(lvl.size()));
    return out;
}

DyadicPartition build_dyadic_partition(const MatrixXd& dist, int k_star) {
    const int n = static_cast<int>(dist.rows());
    if (n == 0 || dist.cols() != n) throw InputError("dyadic partition needs a nonempty square distance matrix");
    if (k_star < 1) throw InputError("k_star must be >= 1");
    DyadicPartition part;
    // Deepest level whose diameter bound is still a normal double.
    const int k_cap = static_cast<int>(std::floor(std::log(DBL_MIN) / std::log(part.delta)));
    if (k_star > k_cap) {
        part.warnings.push_back("k_star " + std::to_string(k_star) + " capped at " + std::to_string(k_cap) +
                                " (delta^k underflows)");
        k_star = k_cap;
    }
    std::vector<std::vector<int>> parent_cells{std::vector<int>(n)};
    std::iota(parent_cells[0].begin(), parent_cells[0].end(), 0);
    for (int k = 1; k <= k_star; ++k) {
        const double bound = std::pow(part.delta, k) + 1e-12;
        std::vector<std::vector<int>> cells;
        std::vector<int> parents;
        for (int pc = 0; pc < static_cast<int>(parent_cells.size()); ++pc) {
            std::vector<int> left = parent_cells[pc];
            while (!left.empty()) {
                std::vector<int> cell{left.front()}, rest;
                for (std::size_t t = 1; t < left.size(); ++t) {
                    const int i = left[t];
                    bool fits = true;
                    for (int j : cell)
                        if (dist(i, j) > bound) {
                            fits = false;
                            break;
                        }
                    (fits ? cell : rest).push_back(i);
                }
                cells.push_back(std::move(cell));
                parents.push_back(pc);
                left = std::move(rest);
            }
        }
        part.levels.push_back(cells);
        part.parents.push_back(parents);
        parent_cells = std::move(cells);
    }
    return part;
}

void validate_dyadic_partition(const DyadicPartition& part, const MatrixXd& dist) {
    const int n = static_cast<int>(dist.rows());
    std::vector<int> prev(n, 0);
    for (int k = 1; k <= part.k_star(); ++k) {
        const auto& cells = part.levels[k - 1];
        std::vector<int> owner(n, -1);
        const double bound = std::pow(part.delta, k) + 1e-12;
        for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
            if (cells[c].empty()) throw InputError("level " + std::to_string(k) + " has an empty cell");
            for (int i : cells[c]) {
                if (i < 0 || i >= n || owner[i] >= 0)
                    throw InputError("level " + std::to_string(k) + " is not a partition (point " + std::to_string(i) + ")");
                owner[i] = c;
                if (prev[i] != part.parents[k - 1][c])
                    throw InputError("level " + std::to_string(k) + " cell " + std::to_string(c) + " is not nested");
                for (int j : cells[c])
                    if (dist(i, j) > bound)
                        throw InputError("level " + std::to_string(k) + " cell " + std::to_string(c) +
                                         " exceeds diameter delta^k");
            }
        }
        for (int i = 0; i < n; ++i)
            if (owner[i] < 0) throw InputError("level " + std::to_string(k) + " misses point " + std::to_string(i));
        prev = owner;
    }
}

std::vector<double> level_discrepancies(const VectorXd& a, const VectorXd& b, const DyadicPartition& part) {
    if (a.size() != b.size()) throw InputError("weight vectors differ in length");
    std::vector<double> out;
    for (const auto& cells : part.levels) {
        double s = 0;
        for (const auto& cell : cells) {
            double diff = 0;
            for (int i : cell) {
                if (i >= a.size()) throw InputError("partition refers to a point outside the weight vectors");
                diff += a(i) - b(i);
            }
            s += std::abs(diff);
        }
        out.push_back(s);
    }
    return out;
}

double transport_upper_bound(const VectorXd& lambda_w, const VectorXd& mu_w, const DyadicPartition& part, double p,
                             double q) {
    const double mass = lambda_w.sum();
    if (std::abs(mass - mu_w.sum()) > 1e-9) throw InputError("transport bound needs lambda(S) = mu(S)");
    const auto disc = level_discrepancies(lambda_w, mu_w, part);
    double levels = 0;
    for (int k = 1; k <= part.k_star(); ++k) levels += cost_modulus(std::pow(part.delta, k - 1), p, q) * disc[k - 1];
    return 3.0 * mass * levels + cost_modulus(std::pow(part.delta, part.k_star()), p, q) * mass * mass;
}

RateConstants rate_constants(double p, double q, double s, double eps_prime) {
    std::ostringstream os;
    if (!(s > 2 * p)) os << "s > 2p fails (s = " << s << ", p = " << p << ")";
    else if (!(s > 2 * p * q)) os << "s > 2pq fails (s = " << s << ", pq = " << p * q << ")";
    else if (!(eps_prime > 0 && eps_prime <= 1)) os << "0 < eps' <= 1 fails (eps' = " << eps_prime << ")";
    if (!os.str().empty()) throw InputError("rate bound domain: " + os.str());
    RateConstants c;
    c.alpha = s * p / (s - 2 * p);
    const double top = std::pow(3.0, 3 * p * q);
    c.c1 = top + top / (std::pow(3.0, s / 2 - p * q) - 1) + std::pow(3.0, 3 * c.alpha + 1);
    c.c2 = 1.5 * std::pow(3.0 / eps_prime, s / 2);
    return c;
}

double rate_bound(int n, double p, double q, double s, double eps_prime) {
    if (n < 1) throw InputError("rate bound needs n >= 1");
    const auto c = rate_constants(p, q, s, eps_prime);
    const double nn = n;
    return c.c1 * std::pow(nn, -p * q / s) + 1.5 * std::pow(nn, -p / s) + c.c2 / std::sqrt(nn);
}

double deviation_bound(double mass_in_set, int cells, int n) {
    return 2.0 * (1.0 - mass_in_set) + std::sqrt(static_cast<double>(cells) / n);
}

ExperimentConfig experiment_from_json(const nlohmann::json& doc, std::vector<std::string>* warnings) {
    static const std::vector<std::string> known = {"ground", "r",    "p",         "q",    "n",       "trials",
                                                   "seed",   "grid", "k_star",    "s",    "eps_prime", "jobs",
                                                   "feas_tol", "gap_tol", "max_iter", "output"};
    ExperimentConfig c;
    try {
        c.ground = ground_from_json(doc.at("ground"));
        c.r = doc.value("r", c.r);
        c.p = doc.value("p", c.p);
        c.q = doc.value("q", c.q);
        if (doc.contains("n")) c.n_values = doc.at("n").get<std::vector<int>>();
        c.trials = doc.value("trials", c.trials);
        c.seed = doc.value("seed", c.seed);
        c.grid = doc.value("grid", c.grid);
        c.k_star = doc.value("k_star", c.k_star);
        c.s = doc.value("s", c.s);
        c.eps_prime = doc.value("eps_prime", c.eps_prime);
        c.jobs = doc.value("jobs", c.jobs);
        c.solver.feas = doc.value("feas_tol", c.solver.feas);
        c.solver.gap = doc.value("gap_tol", c.solver.gap);
        c.solver.max_iter = doc.value("max_iter", c.solver.max_iter);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("experiment config: ") + e.what());
    }
    if (warnings)
        for (const auto& [key, value] : doc.items())
            if (std::find(known.begin(), known.end(), key) == known.end())
                warnings->push_back("experiment config: unknown field '" + key + "' ignored");
    if (c.n_values.empty()) throw InputError("experiment config: n list is empty");
    for (int n : c.n_values)
        if (n < 1) throw InputError("experiment config: sample sizes must be >= 1");
    if (c.trials < 1) throw InputError("experiment config: trials must be >= 1");
    if (c.r < 1) throw InputError("experiment config: r must be >= 1");
    return c;
}

namespace {

struct TrialCell {
    bool ok = false;
    double value = 0;
    double transport = 0;
    std::vector<double> disc;
    std::string error;
};

}  // namespace

RateReport consistency_experiment(const ExperimentConfig& cfg) {
    validate_ground(cfg.ground);
    RateReport rep;
    try {
        rate_constants(cfg.p, cfg.q, cfg.s, cfg.eps_prime);
        rep.bound_in_domain = true;
    } catch (const InputError& e) {
        rep.bound_domain_message = e.what();
    }
    const DiscreteMeasure mu = discretize(cfg.ground, cfg.grid);
    rep.level_counts = build_dyadic_partition(mu.space.dist, cfg.k_star).counts();
    const int nmax = *std::max_element(cfg.n_values.begin(), cfg.n_values.end());
    const std::size_t nn = cfg.n_values.size();
    std::vector<std::vector<TrialCell>> cells(cfg.trials, std::vector<TrialCell>(nn));

    parallel_for(static_cast<std::size_t>(cfg.trials), cfg.jobs, [&](std::size_t t) {
        const auto draws = draw_points(cfg.ground, nmax, cfg.seed + t);
        for (std::size_t k = 0; k < nn; ++k) {
            TrialCell& out = cells[t][k];
            const std::vector<double> first(draws.begin(), draws.begin() + cfg.n_values[k]);
            const DiscreteMeasure emp = empirical_measure(cfg.ground, first);
            // Common ground set: the discretization plus any sample point not on it.
            std::vector<double> coords = mu.coords;
            for (double x : emp.coords)
                if (std::find(coords.begin(), coords.end(), x) == coords.end()) coords.push_back(x);
            std::vector<int> order(coords.size());
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](int a, int b) { return coords[a] < coords[b]; });
            const int u = static_cast<int>(coords.size());
            MatrixXd D(u, u);
            VectorXd lam = VectorXd::Zero(u), base = VectorXd::Zero(u);
            for (int a = 0; a < u; ++a) {
                const double x = coords[order[a]];
                for (int b = 0; b < u; ++b) D(a, b) = a == b ? 0.0 : cfg.ground.distance(x, coords[order[b]]);
                for (std::size_t e = 0; e < emp.coords.size(); ++e)
                    if (emp.coords[e] == x) lam(a) = emp.space.weights(static_cast<int>(e));
                for (std::size_t e = 0; e < mu.coords.size(); ++e)
                    if (mu.coords[e] == x) base(a) = mu.space.weights(static_cast<int>(e));
            }
            const auto dy = build_dyadic_partition(D, cfg.k_star);
            out.disc = level_discrepancies(lam, base, dy);
            out.transport = transport_upper_bound(lam, base, dy, cfg.p, cfg.q);
            try {
                const auto lb = gw_lower_bound(emp.space, mu.space, cfg.r, cfg.p, cfg.q, cfg.relaxation, cfg.solver);
                if (lb.solution.status == SdpStatus::optimal) {
                    out.ok = true;
                    out.value = lb.value;
                } else {
                    out.error = to_string(lb.solution.status);
                }
            } catch (const NumericalError& e) {
                out.error = e.what();
            } catch (const SizeCapError& e) {
                out.error = e.what();
            }
        }
    });

    for (std::size_t k = 0; k < nn; ++k) {
        RateRow row;
        row.n = cfg.n_values[k];
        std::vector<double> vals;
        const int levels = static_cast<int>(cells[0][k].disc.size());
        row.discrepancy_mean.assign(levels, 0.0);
        row.discrepancy_stderr.assign(levels, 0.0);
        std::vector<double> disc_sq(levels, 0.0);
        for (int t = 0; t < cfg.trials; ++t) {
            const auto& c = cells[t][k];
            row.transport_mean += c.transport / cfg.trials;
            for (int l = 0; l < levels; ++l) {
                row.discrepancy_mean[l] += c.disc[l] / cfg.trials;
                disc_sq[l] += c.disc[l] * c.disc[l];
            }
            if (c.ok) {
                vals.push_back(c.value);
            } else {
                rep.failures.push_back("n=" + std::to_string(row.n) + " trial " + std::to_string(t) + ": " + c.error);
            }
        }
        for (int l = 0; l < levels; ++l) {
            const double var = cfg.trials > 1 ? std::max(0.0, (disc_sq[l] - cfg.trials * row.discrepancy_mean[l] *
                                                                               row.discrepancy_mean[l]) /
                                                                  (cfg.trials - 1))
                                              : 0.0;
            row.discrepancy_stderr[l] = std::sqrt(var / cfg.trials);
            row.deviation_envelope.push_back(deviation_bound(1.0, rep.level_counts.at(l), row.n));
        }
        row.trials_ok = static_cast<int>(vals.size());
        row.trials_failed = cfg.trials - row.trials_ok;
        if (!vals.empty()) {
            row.mean = std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
            double ss = 0;
            for (double v : vals) ss += (v - row.mean) * (v - row.mean);
            row.stdev = vals.size() > 1 ? std::sqrt(ss / (vals.size() - 1)) : 0.0;
            row.stderr_ = row.stdev / std::sqrt(static_cast<double>(vals.size()));
        } else {
            row.mean = std::numeric_limits<double>::quiet_NaN();
        }
        row.bound = rep.bound_in_domain ? rate_bound(row.n, cfg.p, cfg.q, cfg.s, cfg.eps_prime)
                                        : std::numeric_limits<double>::quiet_NaN();
        rep.rows.push_back(std::move(row));
    }

    rep.monotone = true;
    for (std::size_t k = 1; k < rep.rows.size(); ++k) {
        const auto &a = rep.rows[k - 1], &b = rep.rows[k];
        if (!(b.mean <= a.mean + std::hypot(a.stderr_, b.stderr_))) rep.monotone = false;
    }
    rep.below_bound = rep.bound_in_domain;
    for (const auto& row : rep.rows)
        if (!(row.mean <= row.bound)) rep.below_bound = false;
    rep.fitted_exponent = std::numeric_limits<double>::quiet_NaN();
    if (rep.rows.size() >= 2 && std::all_of(rep.rows.begin(), rep.rows.end(), [](const RateRow& r) { return r.mean > 0; })) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double k = rep.rows.size();
        for (const auto& row : rep.rows) {
            const double x = std::log(row.n), y = std::log(row.mean);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double den = k * sxx - sx * sx;
        if (den > 0) rep.fitted_exponent = (k * sxy - sx * sy) / den;
    }
    return rep;
}

nlohmann::json rate_report_to_json(const RateReport& rep) {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"n", r.n},
                        {"trials_ok", r.trials_ok},
                        {"trials_failed", r.trials_failed},
                        {"mean", num(r.mean)},
                        {"stdev", num(r.stdev)},
                        {"stderr", num(r.stderr_)},
                        {"transport_bound_mean", num(r.transport_mean)},
                        {"rate_bound", num(r.bound)},
                        {"level_discrepancy_mean", r.discrepancy_mean},
                        {"level_discrepancy_stderr", r.discrepancy_stderr},
                        {"deviation_envelope", r.deviation_envelope}});
    return {{"rows", rows},
            {"bound_in_domain", rep.bound_in_domain},
            {"bound_domain_message", rep.bound_domain_message},
            {"fitted_exponent", num(rep.fitted_exponent)},
            {"monotone", rep.monotone},
            {"below_bound", rep.below_bound},
            {"level_counts", rep.level_counts},
            {"failures", rep.failures}};
}

std::string rate_report_table(const RateReport& rep) {
    std::ostringstream os;
    os << "n ok failed mean stdev stderr transport_bound rate_bound\n";
    os << std::setprecision(10);
    for (const auto& r : rep.rows)
        os << r.n << ' ' << r.trials_ok << ' ' << r.trials_failed << ' ' << r.mean << ' ' << r.stdev << ' ' << r.stderr_
           << ' ' << r.transport_mean << ' ' << r.bound << '\n';
    return os.str();
}

}  // namespace gwsos

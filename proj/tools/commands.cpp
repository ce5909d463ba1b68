#include "commands.hpp"

#include "gwsos/geometry.hpp"
#include "gwsos/oracle.hpp"
#include "gwsos/records.hpp"
#include "gwsos/sampling.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>

namespace gwsos::cli {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

MetricMeasureSpace load(const std::string& path, bool normalize, RunManifest& m, const std::string& role) {
    std::vector<std::string> warnings;
    auto s = load_space_file(path, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << path << ": " << w << "\n";
    m.input_digests[role] = digest_file(path);
    if (s.name.empty()) s.name = path;
    return normalize ? normalize_diameter(s) : s;
}

nlohmann::json tol_json(const SdpTolerances& t) {
    return {{"feas_tol", t.feas}, {"gap_tol", t.gap}, {"max_iter", t.max_iter}};
}

nlohmann::json solution_json(const SdpSolution& s) {
    return {{"status", to_string(s.status)},     {"objective", s.objective_value}, {"dual_objective", s.dual_value},
            {"equality_residual", s.equality_residual}, {"min_eigenvalue", s.min_eigenvalue}, {"gap", s.gap},
            {"iterations", s.iterations},       {"message", s.message}};
}

nlohmann::json matrix_json(const Eigen::MatrixXd& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < M.rows(); ++i) {
        std::vector<double> row(M.cols());
        for (int j = 0; j < M.cols(); ++j) row[j] = M(i, j);
        rows.push_back(row);
    }
    return rows;
}

void finish(RecordFile& file, const Common& c) {
    if (!c.output.empty()) file.write(c.output);
}

// Points in the unit square with 2..max_points points, diameter normalized.
std::vector<MetricMeasureSpace> random_spaces(int count, int min_points, int max_points, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> size(min_points, max_points);
    std::vector<MetricMeasureSpace> out;
    for (int k = 0; k < count; ++k) {
        const int n = size(rng);
        Eigen::MatrixXd P(n, 2);
        for (int i = 0; i < n; ++i) P.row(i) << u(rng), u(rng);
        Eigen::MatrixXd D(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) D(i, j) = (P.row(i) - P.row(j)).norm();
        Eigen::VectorXd w(n);
        for (int i = 0; i < n; ++i) w(i) = 0.1 + u(rng);
        w /= w.sum();
        out.push_back(normalize_diameter(make_space(D, w, {}, "random" + std::to_string(k))));
    }
    return out;
}

}  // namespace

RelaxationOptions ProblemArgs::relaxation() const {
    RelaxationOptions o;
    o.full_moment_block = !no_full_block;
    o.full_degree_marginals = !printed_marginals;
    o.facial_reduction = !no_facial_reduction;
    return o;
}

int cmd_lower_bound(const ProblemArgs& a, const Common& c) {
    RunManifest m;
    m.command = "lower-bound";
    const auto X = load(a.x_file, a.normalize, m, "x");
    const auto Y = load(a.y_file, a.normalize, m, "y");
    m.parameters = {{"r", a.r}, {"p", a.p}, {"q", a.q}, {"normalize", a.normalize}, {"full_moment_block", !a.no_full_block},
                    {"full_degree_marginals", !a.printed_marginals}, {"facial_reduction", !a.no_facial_reduction}};
    m.parameters.update(tol_json(a.tol));
    const auto t0 = Clock::now();
    const auto lb = gw_lower_bound(X, Y, a.r, a.p, a.q, a.relaxation(), a.tol);
    m.timings["solve"] = since(t0);
    RecordFile file(m);
    file.add("lower_bound", {{"instance", digest_bytes(m.input_digests["x"] + m.input_digests["y"])},
                             {"r", a.r},
                             {"p", a.p},
                             {"q", a.q},
                             {"value", lb.value},
                             {"delta", lb.delta},
                             {"solver", solution_json(lb.solution)},
                             {"moment_length", lb.info.moment_length},
                             {"equalities", lb.info.equalities},
                             {"block_dims", lb.info.block_dims}});
    finish(file, c);
    std::cout << std::setprecision(12) << "value " << lb.value << "\ndelta " << lb.delta << "\nstatus "
              << to_string(lb.solution.status) << "\n";
    return lb.solution.status == SdpStatus::optimal ? kPass : kNumericalIssue;
}

int cmd_oracle(const OracleArgs& a, const Common& c) {
    RunManifest m;
    m.command = "oracle";
    const auto X = load(a.x_file, a.normalize, m, "x");
    const auto Y = load(a.y_file, a.normalize, m, "y");
    OracleOptions o;
    o.grid_points = a.grid_points;
    o.max_starts = a.max_starts;
    o.force_grid = a.force_grid;
    o.jobs = c.jobs;
    m.parameters = {{"p", a.p}, {"q", a.q}, {"grid_points", a.grid_points}, {"max_starts", a.max_starts},
                    {"force_grid", a.force_grid}};
    const auto t0 = Clock::now();
    const auto res = brute_force_gw(X, Y, a.p, a.q, o);
    m.timings["search"] = since(t0);
    RecordFile file(m);
    file.add("oracle", {{"value", res.value},
                        {"method", to_string(res.method)},
                        {"exact", res.exact},
                        {"certificate", res.certificate},
                        {"starts", res.starts},
                        {"coupling", matrix_json(res.coupling)}});
    finish(file, c);
    std::cout << std::setprecision(12) << "value " << res.value << "\nmethod " << to_string(res.method) << "\nexact "
              << (res.exact ? "true" : "false") << "\n";
    return kPass;
}

int cmd_metric_check(const MetricCheckArgs& a, const Common& c) {
    RunManifest m;
    m.command = "metric-check";
    std::vector<MetricMeasureSpace> spaces;
    for (std::size_t k = 0; k < a.space_files.size(); ++k)
        spaces.push_back(load(a.space_files[k], true, m, "space" + std::to_string(k)));
    if (a.random > 0) {
        m.seed = c.seed;
        auto extra = random_spaces(a.random, 2, a.max_points, c.seed);
        spaces.insert(spaces.end(), extra.begin(), extra.end());
    }
    if (spaces.size() < 3) throw InputError("metric-check needs at least 3 spaces (files or --random)");
    PseudoMetricOptions o;
    o.identity_tol = a.identity_tol;
    o.symmetry_tol = a.symmetry_tol;
    o.triangle_tol = a.triangle_tol;
    o.jobs = c.jobs;
    o.solver = a.tol;
    m.parameters = {{"r", a.r}, {"p", a.p}, {"q", a.q}, {"spaces", spaces.size()}, {"identity_tol", a.identity_tol},
                    {"symmetry_tol", a.symmetry_tol}, {"triangle_tol", a.triangle_tol}};
    m.parameters.update(tol_json(a.tol));
    const auto t0 = Clock::now();
    const auto rep = pseudo_metric_check(spaces, a.r, a.p, a.q, o);
    m.timings["solves"] = since(t0);
    RecordFile file(m);
    file.add("metric_check", {{"delta", matrix_json(rep.delta)},
                              {"value", matrix_json(rep.value)},
                              {"identity_worst", rep.identity_worst},
                              {"symmetry_worst", rep.symmetry_worst},
                              {"nonneg_worst", rep.nonneg_worst},
                              {"triangle_worst", rep.triangle_worst},
                              {"triples", rep.triples},
                              {"solver_issues", rep.solver_issues},
                              {"passed", rep.passed()}});
    finish(file, c);
    std::cout << std::setprecision(6) << "spaces " << spaces.size() << "\nidentity_worst " << rep.identity_worst
              << (rep.identity ? " ok" : " FAIL") << "\nsymmetry_worst " << rep.symmetry_worst
              << (rep.symmetry ? " ok" : " FAIL") << "\nnonneg_worst " << rep.nonneg_worst << (rep.nonneg ? " ok" : " FAIL")
              << "\ntriangle_worst " << rep.triangle_worst << (rep.triangle ? " ok" : " FAIL") << " over " << rep.triples
              << " triples\n";
    for (const auto& s : rep.solver_issues) std::cout << "solver_issue " << s << "\n";
    return rep.passed() ? kPass : kNumericalIssue;
}

int cmd_glue_check(const GlueCheckArgs& a, const Common& c) {
    RunManifest m;
    m.command = "glue-check";
    std::vector<MetricMeasureSpace> sp;
    if (!a.x_file.empty() || !a.y_file.empty() || !a.z_file.empty()) {
        if (a.x_file.empty() || a.y_file.empty() || a.z_file.empty())
            throw InputError("glue-check needs all of --x, --y, --z (or none for random spaces)");
        sp = {load(a.x_file, true, m, "x"), load(a.y_file, true, m, "y"), load(a.z_file, true, m, "z")};
    } else {
        m.seed = c.seed;
        sp = random_spaces(3, a.random_points, a.random_points, c.seed);
    }
    const auto &X = sp[0], &Y = sp[1], &Z = sp[2];
    m.parameters = {{"source", a.source}, {"r", a.r}, {"p", a.p}, {"q", a.q}, {"marginal_tol", a.marginal_tol},
                    {"check_tol", a.check_tol}};
    const auto t0 = Clock::now();
    TensorMeasure P, Q;
    if (a.source == "product") {
        P = product_tensor(product_coupling(X.weights, Y.weights), a.r);
        Q = product_tensor(product_coupling(Y.weights, Z.weights), a.r);
    } else if (a.source == "oracle") {
        P = product_tensor(brute_force_gw(X, Y, a.p, a.q).coupling, a.r);
        Q = product_tensor(brute_force_gw(Y, Z, a.p, a.q).coupling, a.r);
    } else if (a.source == "solver") {
        const auto lp = gw_lower_bound(X, Y, a.r, a.p, a.q, {}, a.tol);
        const auto lq = gw_lower_bound(Y, Z, a.r, a.p, a.q, {}, a.tol);
        if (lp.solution.status != SdpStatus::optimal || lq.solution.status != SdpStatus::optimal)
            throw NumericalError("glue-check: relaxation solve did not reach optimal status");
        P = moments_to_tensor_measure(lp.y, a.r, X.size(), Y.size());
        Q = moments_to_tensor_measure(lq.y, a.r, Y.size(), Z.size());
    } else {
        throw InputError("glue-check: --source must be product, oracle or solver");
    }
    const auto res = glue(P, Q, Y.weights);
    const auto chk = check_tensor_measure(res.R, X.weights, Z.weights);
    m.timings["glue"] = since(t0);
    const bool pass = res.xy_error <= a.marginal_tol && res.yz_error <= a.marginal_tol && chk.worst() <= a.check_tol;
    RecordFile file(m);
    file.add("glue_check", {{"xy_error", res.xy_error},
                            {"yz_error", res.yz_error},
                            {"zero_slices", res.zero_slices},
                            {"sym_violation", chk.sym_violation},
                            {"mar_violation", chk.mar_violation},
                            {"psd_violation", chk.psd_violation},
                            {"passed", pass}});
    finish(file, c);
    std::cout << std::setprecision(6) << "xy_error " << res.xy_error << "\nyz_error " << res.yz_error << "\nsym "
              << chk.sym_violation << "\nmar " << chk.mar_violation << "\npsd " << chk.psd_violation << "\n"
              << (pass ? "pass" : "FAIL") << "\n";
    return pass ? kPass : kNumericalIssue;
}

int cmd_concentrate(const ConcentrateArgs& a, const Common& c) {
    RunManifest m;
    m.command = "concentrate";
    const auto X = load(a.x_file, true, m, "x");
    auto partition = [&](const MetricMeasureSpace& S, const std::string& file, const std::string& role) {
        if (file.empty()) return a.eps > 0 ? covering_partition(S, a.eps) : singleton_partition(S.size());
        std::ifstream in(file);
        if (!in) throw InputError("cannot read " + file);
        m.input_digests[role] = digest_file(file);
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw InputError(file + ": " + e.what());
        }
        return partition_from_json(doc);
    };
    const auto px = partition(X, a.x_partition, "x_partition");
    validate_partition(px, X);
    const auto cx = concentrate_space(X, px);
    m.parameters = {{"eps", a.eps}, {"r", a.r}, {"p", a.p}, {"q", a.q}, {"slack", a.slack}};
    RecordFile file(m);
    file.add("concentrated_space", {{"role", "x"}, {"partition", partition_to_json(px)}, {"space", space_to_json(cx)}});
    if (!a.write_x.empty()) {
        std::ofstream out(a.write_x);
        if (!out) throw InputError("cannot write " + a.write_x);
        out << space_to_json(cx).dump(2) << "\n";
    }
    std::cout << std::setprecision(12) << "x_cells " << px.size() << " radius " << px.radius << "\n";
    int code = kPass;
    if (!a.y_file.empty()) {
        const auto Y = load(a.y_file, true, file.manifest(), "y");
        const auto py = partition(Y, a.y_partition, "y_partition");
        validate_partition(py, Y);
        const auto cy = concentrate_space(Y, py);
        file.add("concentrated_space", {{"role", "y"}, {"partition", partition_to_json(py)}, {"space", space_to_json(cy)}});
        if (!a.write_y.empty()) {
            std::ofstream out(a.write_y);
            if (!out) throw InputError("cannot write " + a.write_y);
            out << space_to_json(cy).dump(2) << "\n";
        }
        const auto t0 = Clock::now();
        const auto fine = gw_lower_bound(X, Y, a.r, a.p, a.q, {}, a.tol);
        const auto coarse = gw_lower_bound(cx, cy, a.r, a.p, a.q, {}, a.tol);
        file.manifest().timings["solves"] = since(t0);
        const double eps = std::max(px.size() == X.size() ? 0.0 : px.radius, py.size() == Y.size() ? 0.0 : py.radius);
        const double C = a.lipschitz > 0 ? a.lipschitz : lipschitz_constant(a.p, a.q);
        const double diff = std::abs(fine.value - coarse.value), allowed = 4 * C * eps + a.slack;
        const bool solved = fine.solution.status == SdpStatus::optimal && coarse.solution.status == SdpStatus::optimal;
        const bool pass = solved && diff <= allowed;
        file.add("concentration_stability", {{"fine", fine.value},
                                             {"coarse", coarse.value},
                                             {"difference", diff},
                                             {"eps", eps},
                                             {"lipschitz", C},
                                             {"allowed", allowed},
                                             {"fine_status", to_string(fine.solution.status)},
                                             {"coarse_status", to_string(coarse.solution.status)},
                                             {"passed", pass}});
        std::cout << "y_cells " << py.size() << " radius " << py.radius << "\nfine " << fine.value << "\ncoarse "
                  << coarse.value << "\ndifference " << diff << " allowed " << allowed << "\n"
                  << (pass ? "pass" : "FAIL") << "\n";
        code = pass ? kPass : kNumericalIssue;
    }
    finish(file, c);
    return code;
}

int cmd_experiment(const ExperimentArgs& a, const Common& c) {
    RunManifest m;
    m.command = "experiment";
    std::ifstream in(a.config);
    if (!in) throw InputError("cannot read " + a.config);
    m.input_digests["config"] = digest_file(a.config);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(a.config + ": " + e.what());
    }
    std::vector<std::string> warnings;
    auto cfg = experiment_from_json(doc, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    if (a.seed_given) cfg.seed = c.seed;
    cfg.jobs = c.jobs;
    m.seed = cfg.seed;
    m.parameters = {{"ground", ground_to_json(cfg.ground)}, {"r", cfg.r}, {"p", cfg.p}, {"q", cfg.q},
                    {"n", cfg.n_values}, {"trials", cfg.trials}, {"grid", cfg.grid}, {"k_star", cfg.k_star},
                    {"s", cfg.s}, {"eps_prime", cfg.eps_prime}};
    m.parameters.update(tol_json(cfg.solver));
    const auto t0 = Clock::now();
    const auto rep = consistency_experiment(cfg);
    m.timings["experiment"] = since(t0);
    RecordFile file(m);
    file.add("rate_report", rate_report_to_json(rep));
    std::string out = c.output.empty() ? doc.value("output", std::string()) : c.output;
    if (!out.empty()) file.write(out);
    const std::string table = rate_report_table(rep);
    if (!a.table.empty()) {
        std::ofstream t(a.table);
        if (!t) throw InputError("cannot write " + a.table);
        t << table;
    }
    std::cout << table << "monotone " << (rep.monotone ? "true" : "false") << "\nbelow_bound "
              << (rep.below_bound ? "true" : "false") << "\nfailed_trials " << rep.failures.size() << "\n";
    if (!rep.bound_in_domain) std::cout << "rate_bound " << rep.bound_domain_message << "\n";
    const bool pass = rep.failures.empty() && rep.monotone && (!rep.bound_in_domain || rep.below_bound);
    return pass ? kPass : kNumericalIssue;
}

int cmd_solver_dump(const ProblemArgs& a, const Common& c) {
    RunManifest m;
    m.command = "solver-dump";
    const auto X = load(a.x_file, a.normalize, m, "x");
    const auto Y = load(a.y_file, a.normalize, m, "y");
    const auto rel = assemble_relaxation(make_relaxation_spec(X, Y, a.r, a.p, a.q), a.relaxation());
    const auto doc = rel.problem.to_json();
    if (c.output.empty()) {
        std::cout << doc.dump() << "\n";
    } else {
        std::ofstream out(c.output);
        if (!out) throw InputError("cannot write " + c.output);
        out << doc.dump() << "\n";
        std::cout << "variables " << rel.problem.nvars() << "\nequalities " << rel.problem.equalities().size()
                  << "\nblocks " << rel.problem.blocks().size() << "\n";
    }
    return kPass;
}

}  // namespace gwsos::cli

#include "commands.hpp"

#include "gwsos/mmspace.hpp"
#include "gwsos/parallel.hpp"
#include "gwsos/polymoment.hpp"
#include "gwsos/records.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

using namespace gwsos;
using namespace gwsos::cli;

namespace {

void add_tol(CLI::App* sub, SdpTolerances& tol) {
    sub->add_option("--feas-tol", tol.feas, "solver feasibility tolerance")->capture_default_str();
    sub->add_option("--gap-tol", tol.gap, "solver relative gap tolerance")->capture_default_str();
    sub->add_option("--max-iter", tol.max_iter, "solver iteration limit")->capture_default_str();
}

void add_level(CLI::App* sub, int& r, double& p, double& q) {
    sub->add_option("-r,--level", r, "hierarchy level")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("-p", p, "outer exponent")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("-q", q, "distance exponent")->capture_default_str()->check(CLI::PositiveNumber);
}

void add_problem(CLI::App* sub, ProblemArgs& a) {
    sub->add_option("--x", a.x_file, "first space (JSON)")->required();
    sub->add_option("--y", a.y_file, "second space (JSON)")->required();
    add_level(sub, a.r, a.p, a.q);
    sub->add_flag("--normalize", a.normalize, "rescale each space to diameter 1");
    sub->add_flag("--no-full-block", a.no_full_block, "omit the full degree-r moment block");
    sub->add_flag("--printed-marginals", a.printed_marginals, "marginal equalities only up to degree 2r-2");
    sub->add_flag("--no-facial-reduction", a.no_facial_reduction, "keep moment blocks uncompressed");
    add_tol(sub, a.tol);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Moment-SOS lower bounds for Gromov-Wasserstein distances"};
    app.set_version_flag("--version", std::string(tool_version()));
    app.require_subcommand(1);
    app.fallthrough();

    Common common;
    common.jobs = default_jobs();
    app.add_option("-j,--jobs", common.jobs, "worker threads (default from GWSOS_JOBS)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("-o,--output", common.output, "write a record file");
    CLI::Option* seed_opt = app.add_option("--seed", common.seed, "random seed")->capture_default_str();

    ProblemArgs lb;
    auto* lb_cmd = app.add_subcommand("lower-bound", "relaxation value for a pair of spaces");
    add_problem(lb_cmd, lb);

    ProblemArgs dump;
    auto* dump_cmd = app.add_subcommand("solver-dump", "print the assembled semidefinite program as JSON");
    add_problem(dump_cmd, dump);

    OracleArgs orc;
    auto* orc_cmd = app.add_subcommand("oracle", "brute-force upper bound on the GW objective");
    orc_cmd->add_option("--x", orc.x_file)->required();
    orc_cmd->add_option("--y", orc.y_file)->required();
    orc_cmd->add_option("-p", orc.p)->capture_default_str()->check(CLI::PositiveNumber);
    orc_cmd->add_option("-q", orc.q)->capture_default_str()->check(CLI::PositiveNumber);
    orc_cmd->add_flag("--normalize", orc.normalize);
    orc_cmd->add_option("--grid-points", orc.grid_points)->capture_default_str()->check(CLI::Range(2, 1000));
    orc_cmd->add_option("--max-starts", orc.max_starts)->capture_default_str()->check(CLI::PositiveNumber);
    orc_cmd->add_flag("--force-grid", orc.force_grid, "skip the closed-form 2x2 path");

    MetricCheckArgs mc;
    auto* mc_cmd = app.add_subcommand("metric-check", "pseudo-metric axioms over a family of spaces");
    mc_cmd->add_option("spaces", mc.space_files, "space files");
    mc_cmd->add_option("--random", mc.random, "add this many random spaces")->check(CLI::NonNegativeNumber);
    mc_cmd->add_option("--max-points", mc.max_points)->capture_default_str()->check(CLI::Range(2, 8));
    add_level(mc_cmd, mc.r, mc.p, mc.q);
    mc_cmd->add_option("--identity-tol", mc.identity_tol)->capture_default_str();
    mc_cmd->add_option("--symmetry-tol", mc.symmetry_tol)->capture_default_str();
    mc_cmd->add_option("--triangle-tol", mc.triangle_tol)->capture_default_str();
    add_tol(mc_cmd, mc.tol);

    GlueCheckArgs gc;
    auto* gc_cmd = app.add_subcommand("glue-check", "glue two tensor measures through a shared space");
    gc_cmd->add_option("--x", gc.x_file);
    gc_cmd->add_option("--y", gc.y_file);
    gc_cmd->add_option("--z", gc.z_file);
    gc_cmd->add_option("--random-points", gc.random_points)->capture_default_str()->check(CLI::Range(1, 4));
    gc_cmd->add_option("--source", gc.source)
        ->capture_default_str()
        ->check(CLI::IsMember({"product", "oracle", "solver"}));
    add_level(gc_cmd, gc.r, gc.p, gc.q);
    gc_cmd->add_option("--marginal-tol", gc.marginal_tol)->capture_default_str();
    gc_cmd->add_option("--check-tol", gc.check_tol)->capture_default_str();
    add_tol(gc_cmd, gc.tol);

    ConcentrateArgs cc;
    auto* cc_cmd = app.add_subcommand("concentrate", "concentrate spaces on cells and compare relaxation values");
    cc_cmd->add_option("--x", cc.x_file)->required();
    cc_cmd->add_option("--y", cc.y_file);
    cc_cmd->add_option("--x-partition", cc.x_partition, "partition JSON for x");
    cc_cmd->add_option("--y-partition", cc.y_partition, "partition JSON for y");
    cc_cmd->add_option("--eps", cc.eps, "covering radius when no partition file is given")->capture_default_str();
    add_level(cc_cmd, cc.r, cc.p, cc.q);
    cc_cmd->add_option("--lipschitz", cc.lipschitz, "cost Lipschitz constant (default p*q)");
    cc_cmd->add_option("--slack", cc.slack)->capture_default_str();
    cc_cmd->add_option("--write-x", cc.write_x, "write the concentrated x space");
    cc_cmd->add_option("--write-y", cc.write_y, "write the concentrated y space");
    add_tol(cc_cmd, cc.tol);

    ExperimentArgs ex;
    auto* ex_cmd = app.add_subcommand("experiment", "sampling-consistency experiment from a JSON config");
    ex_cmd->add_option("config", ex.config)->required();
    ex_cmd->add_option("--table", ex.table, "write the columnar table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kInputError;
    }

    try {
        if (lb_cmd->parsed()) return cmd_lower_bound(lb, common);
        if (dump_cmd->parsed()) return cmd_solver_dump(dump, common);
        if (orc_cmd->parsed()) return cmd_oracle(orc, common);
        if (mc_cmd->parsed()) return cmd_metric_check(mc, common);
        if (gc_cmd->parsed()) return cmd_glue_check(gc, common);
        if (cc_cmd->parsed()) return cmd_concentrate(cc, common);
        if (ex_cmd->parsed()) {
            ex.seed_given = seed_opt->count() > 0;
            return cmd_experiment(ex, common);
        }
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const SizeCapError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const NumericalError& e) {
        std::cerr << "numerical issue: " << e.what() << "\n";
        return kNumericalIssue;
    } catch (const std::exception& e) {
        std::cerr << "numerical issue: " << e.what() << "\n";
        return kNumericalIssue;
    }
    return kInputError;
}

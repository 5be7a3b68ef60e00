// Batch experiment driver for the grass/sapling/tree lattice models.
//
// Subcommands: simulate, sweep, diagnose, ide, constants. Every run is fully
// reproducible from (config file, master seed); exit codes are 0 on success,
// 2 on configuration errors and 3 on partial failure.

#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "savanna/diagnostics.hpp"
#include "savanna/experiment.hpp"
#include "savanna/ide.hpp"
#include "savanna/meanfield.hpp"

namespace {

using namespace savanna;

struct CommonFlags {
    std::string config;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int replicas = 0;
    int threads = -1;
    std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "experiment config file")->required();
    cmd->add_option("--seed", f.seed, "master seed (overrides config)");
    cmd->add_option("--replicas", f.replicas, "replica count (overrides config)");
    cmd->add_option("--threads", f.threads, "worker threads, 0 = hardware");
    cmd->add_option("--out", f.out, "output directory (overrides config)");
}

experiment::ExperimentSpec load_with_overrides(const CommonFlags& f, CLI::App* cmd) {
    auto spec = experiment::load_spec(f.config);
    if (cmd->count("--seed")) spec.master_seed = f.seed;
    if (cmd->count("--replicas")) spec.replicas = f.replicas;
    if (cmd->count("--threads")) spec.threads = f.threads;
    if (cmd->count("--out")) spec.out_dir = f.out;
    return spec;
}

int run_kinds(const experiment::ExperimentSpec& spec,
              std::initializer_list<const char*> allowed) {
    bool ok = false;
    for (const char* k : allowed) ok |= spec.kind == k;
    if (!ok) {
        std::cerr << "error: [kind] " << spec.kind << " is not valid for this subcommand\n";
        return 2;
    }
    return experiment::run_experiment(spec, std::cout).exit_code;
}

int print_constants(const experiment::ExperimentSpec& spec) {
    nlohmann::json out;
    const auto verdict = meanfield::classify_origin(spec.params, spec.params.omega.min());
    out["meanfield"] = {
        {"determinant", verdict.determinant},
        {"trace", verdict.trace},
        {"origin", verdict.kind == meanfield::OriginKind::Unstable      ? "unstable"
                   : verdict.kind == meanfield::OriginKind::Attracting ? "attracting"
                                                                       : "degenerate"}};
    auto roots = meanfield::interior_fixed_points(spec.params);
    for (const auto& r : roots)
        out["meanfield"]["interior_roots"].push_back(
            {{"G", r.state.G}, {"S", r.state.S}, {"T", r.state.T}, {"omega", r.omega_value}});
    try {
        const auto rc = diagnostics::recovery_constants(spec.params, spec.d, spec.a0_init,
                                                        spec.alpha);
        out["recovery"] = {{"theta", rc.theta}, {"a0", rc.a0},     {"rho", rc.rho},
                           {"eps0", rc.eps0},   {"t0", rc.t0},     {"alpha", rc.alpha},
                           {"lambda_L", rc.lambda_for(spec.L)},    {"t_limit", rc.t_limit(spec.L)}};
    } catch (const std::exception& e) {
        out["recovery"] = {{"error", e.what()}};
    }
    if (spec.params.omega.kind == GrowthKind::Step) {
        try {
            const auto fc = ide::front_constants(spec.params, spec.kappa, spec.d);
            out["front"] = {{"sigma0", fc.sigma0},
                            {"gamma0", fc.gamma0},
                            {"S0", fc.s0},
                            {"T0", fc.t0},
                            {"M", fc.m_radius},
                            {"eps_t1", fc.eps_t1},
                            {"eps_t2", fc.eps_t2},
                            {"eps_profile", fc.eps_profile},
                            {"eps_rate", fc.eps_rate},
                            {"eps_pim", fc.eps_pim},
                            {"delta_pur", fc.delta_pur},
                            {"eps_box", fc.eps_box},
                            {"t_hold", fc.t_hold},
                            {"c_gain", fc.c_gain}};
        } catch (const std::exception& e) {
            out["front"] = {{"error", e.what()}};
        }
    }
    std::cout << out.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"grass/sapling/tree lattice model toolkit"};
    app.require_subcommand(1);

    CommonFlags f_sim, f_sweep, f_diag, f_ide, f_const;
    auto* sim = app.add_subcommand("simulate", "run a single model or replica set");
    add_common(sim, f_sim);
    auto* sweep = app.add_subcommand("sweep", "phase-diagram parameter sweep");
    add_common(sweep, f_sweep);
    auto* diag = app.add_subcommand("diagnose", "drift, recovery, walk and law diagnostics");
    add_common(diag, f_diag);
    auto* idec = app.add_subcommand("ide", "long-range limit solver experiments");
    add_common(idec, f_ide);
    auto* cons = app.add_subcommand("constants", "print derived constant ledgers");
    add_common(cons, f_const);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return run_kinds(load_with_overrides(f_sim, sim),
                             {"simulate", "survival_finite_seed", "stationary_density"});
        if (sweep->parsed())
            return run_kinds(load_with_overrides(f_sweep, sweep), {"phase_sweep"});
        if (diag->parsed())
            return run_kinds(load_with_overrides(f_diag, diag),
                             {"recovery", "brw_bounds", "moving_particles", "diagnostics_suite"});
        if (idec->parsed())
            return run_kinds(load_with_overrides(f_ide, idec), {"ide_front", "front_verify"});
        if (cons->parsed()) return print_constants(load_with_overrides(f_const, cons));
    } catch (const ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

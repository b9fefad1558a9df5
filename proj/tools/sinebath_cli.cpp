// Command-line driver: analytic reports, steady-state trajectories, spectral
// solves, (q1, phi) power sweeps, efficiency curves, Monte Carlo validation
// and eps-convergence tables.
//
// Exit codes: 0 ok, 1 invalid input, 2 numerical failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sinebath/mc.hpp"
#include "sinebath/model.hpp"
#include "sinebath/moments.hpp"
#include "sinebath/perturbation.hpp"
#include "sinebath/report.hpp"
#include "sinebath/spectral.hpp"
#include "sinebath/sweep.hpp"
#include "sinebath/thermo.hpp"

namespace {

struct global_options {
    std::string config_path;
    std::string model = "overdamped";
    std::string out_path;
    int modes = 100;
    std::uint64_t seed = 0;
};

sinebath::model_config resolve_config(global_options const& g)
{
    sinebath::model_config cfg;
    if (!g.config_path.empty()) {
        cfg = sinebath::load_config(g.config_path);
    } else {
        // Table-like defaults; underdamped runs default to m = 1
        sinebath::engine_params p;
        p.gamma = 1;
        p.omega = 2;
        p.T0 = 1;
        p.T1 = 0.5;
        p.epsilon = 1;
        p.q0 = 1;
        cfg.params = p;
        cfg.control = sinebath::control_profile::make(p.q0, 0.0, 0.0, p.epsilon);
    }
    if (g.model == "underdamped") {
        if (cfg.params.m <= 0) {
            cfg.params.m = 1;
        }
        if (g.config_path.empty()) {
            cfg.params.q0 = 10;
            cfg.control.q0 = 10;
        }
    } else if (g.model == "overdamped") {
        cfg.params.m = 0;
    } else {
        throw sinebath::config_error("unknown model: " + g.model);
    }
    sinebath::require_valid(cfg.params);
    return cfg;
}

std::ostream& open_out(global_options const& g, std::optional<std::ofstream>& file)
{
    if (g.out_path.empty()) {
        return std::cout;
    }
    file.emplace(g.out_path);
    if (!*file) {
        throw sinebath::config_error("cannot open output file: " + g.out_path);
    }
    return *file;
}

}  // namespace

int main(int argc, char** argv)
{
    using namespace sinebath;

    CLI::App app{"stochastic heat engine toolkit: sinusoidal-bath Langevin "
                 "models, harmonic balance and perturbation-optimal control"};
    app.require_subcommand(1);
    // accept the global flags on either side of the subcommand name
    app.fallthrough();

    global_options g;
    app.add_option("--config", g.config_path, "flat key=value configuration file");
    app.add_option("--model", g.model, "overdamped|underdamped")
        ->check(CLI::IsMember({"overdamped", "underdamped"}));
    app.add_option("--out", g.out_path, "output path (default stdout)");
    app.add_option("--modes", g.modes, "spectral truncation N")->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "Monte Carlo base seed");

    auto* cmd_analytic =
        app.add_subcommand("analytic", "print the perturbation-theory report");

    auto* cmd_steady =
        app.add_subcommand("steady", "time-domain periodic steady state as CSV");
    int steady_steps = 10000;
    cmd_steady->add_option("--steps", steady_steps, "steps per period");

    auto* cmd_spectral =
        app.add_subcommand("spectral", "Fourier coefficients CSV and power");
    bool spectral_at_optimum = false;
    cmd_spectral->add_flag("--at-optimum", spectral_at_optimum,
                           "use the analytic optimal control instead of the "
                           "configured (q1, phi)");

    auto* cmd_sweep = app.add_subcommand("sweep", "(q1, phi) power-surface CSV");
    grid_spec gs;
    std::string sweep_solver_name = "spectral";
    cmd_sweep->add_option("--q1-min", gs.q1_min);
    cmd_sweep->add_option("--q1-max", gs.q1_max);
    cmd_sweep->add_option("--n-q1", gs.n_q1)->check(CLI::PositiveNumber);
    cmd_sweep->add_option("--phi-min", gs.phi_min);
    cmd_sweep->add_option("--phi-max", gs.phi_max);
    cmd_sweep->add_option("--n-phi", gs.n_phi)->check(CLI::PositiveNumber);
    cmd_sweep->add_option("--solver", sweep_solver_name, "spectral|time-domain")
        ->check(CLI::IsMember({"spectral", "time-domain"}));

    auto* cmd_eff =
        app.add_subcommand("efficiency", "efficiency-vs-T1 curve CSV");
    double eff_t1_min = 0.01, eff_t1_max = 0.5;
    int eff_points = 20;
    double eff_eps = 0.1;
    cmd_eff->add_option("--t1-min", eff_t1_min);
    cmd_eff->add_option("--t1-max", eff_t1_max);
    cmd_eff->add_option("--points", eff_points)->check(CLI::PositiveNumber);
    cmd_eff->add_option("--epsilon", eff_eps);

    auto* cmd_mc = app.add_subcommand("mc", "Monte Carlo validation CSV");
    mc_config mc;
    cmd_mc->add_option("--n-traj", mc.n_traj)->check(CLI::PositiveNumber);
    cmd_mc->add_option("--steps", mc.steps_per_period)->check(CLI::PositiveNumber);
    cmd_mc->add_option("--periods", mc.n_periods)->check(CLI::PositiveNumber);
    cmd_mc->add_option("--burn-in", mc.burn_in_periods);
    cmd_mc->add_option("--samples", mc.n_samples)->check(CLI::PositiveNumber);
    bool mc_at_optimum = false;
    cmd_mc->add_flag("--at-optimum", mc_at_optimum,
                     "use the analytic optimal control");

    auto* cmd_compare =
        app.add_subcommand("compare", "analytic-vs-numeric eps-convergence table");
    std::vector<double> compare_eps = {0.2, 0.1, 0.05, 0.025};
    cmd_compare->add_option("--epsilons", compare_eps, "decreasing eps list");

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        // normalize CLI11's exit codes: 0 for --help, 1 for bad input
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        auto cfg = resolve_config(g);
        auto const& p = cfg.params;
        std::optional<std::ofstream> file;
        std::ostream& os = open_out(g, file);

        auto optimal = [&]() {
            auto oc = p.overdamped() ? overdamped_optimum(p) : underdamped_optimum(p);
            return control_profile::make(p.q0, oc.q1_star, oc.phi_star, p.epsilon);
        };

        if (*cmd_analytic) {
            os << analytic_report_json(p).dump(2) << "\n";
        } else if (*cmd_steady) {
            integrator_options opts;
            opts.steps_per_period = steady_steps;
            auto traj = integrate_to_periodic_steady_state(p, cfg.control, opts);
            write_trajectory_csv(os, p, cfg.control, opts, traj);
        } else if (*cmd_spectral) {
            auto c = spectral_at_optimum ? optimal() : cfg.control;
            auto sol = solve_spectral(p, c, g.modes);
            write_spectral_csv(os, p, c, sol);
            os << "# power=" << spectral_power(sol) << "\n";
        } else if (*cmd_sweep) {
            auto solver = sweep_solver_name == "spectral" ? sweep_solver::spectral
                                                          : sweep_solver::time_domain;
            auto grid = sweep_power(p, gs, solver, g.modes);
            write_sweep_csv(os, p, grid);
        } else if (*cmd_eff) {
            std::vector<double> t1s(static_cast<std::size_t>(eff_points));
            for (int i = 0; i < eff_points; ++i) {
                t1s[static_cast<std::size_t>(i)] =
                    eff_t1_min +
                    (eff_points > 1
                         ? i * (eff_t1_max - eff_t1_min) / (eff_points - 1)
                         : 0);
            }
            auto curve = efficiency_curve(p, t1s, eff_eps, sweep_solver::spectral,
                                          g.modes);
            write_efficiency_csv(os, p, curve, eff_eps);
        } else if (*cmd_mc) {
            mc.seed = g.seed;
            auto c = mc_at_optimum ? optimal() : cfg.control;
            auto stats = p.overdamped() ? simulate_overdamped(p, c, mc)
                                        : simulate_underdamped(p, c, mc);
            write_mc_csv(os, p, c, stats);
        } else if (*cmd_compare) {
            auto table = compare_report(p, compare_eps, g.modes);
            write_compare_csv(os, p, table);
        }
        return 0;
    } catch (sinebath::config_error const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (sinebath::invalid_params const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (std::exception const& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
}

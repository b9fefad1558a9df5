#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "sinebath/mc.hpp"
#include "sinebath/moments.hpp"
#include "sinebath/perturbation.hpp"

using namespace sinebath;
using Catch::Approx;

namespace {

engine_params table_overdamped(double eps = 1.0)
{
    engine_params p;
    p.m = 0;
    p.gamma = 1;
    p.omega = 2;
    p.T0 = 1;
    p.T1 = 0.5;
    p.q0 = 1;
    p.epsilon = eps;
    return p;
}

engine_params table_underdamped(double eps = 1.0)
{
    engine_params p;
    p.m = 1;
    p.gamma = 1;
    p.omega = 2;
    p.T0 = 1;
    p.T1 = 0.5;
    p.q0 = 10;
    p.epsilon = eps;
    return p;
}

control_profile optimal_profile(engine_params const& p)
{
    auto oc = p.overdamped() ? overdamped_optimum(p) : underdamped_optimum(p);
    return control_profile::make(p.q0, oc.q1_star, oc.phi_star, p.epsilon);
}

}  // namespace

TEST_CASE("philox stream sanity")
{
    rng::normal_stream a(12345, 7);
    rng::normal_stream b(12345, 7);
    rng::normal_stream c(12345, 8);
    double mean = 0, var = 0;
    bool all_equal = true;
    bool any_differ = false;
    int const n = 20000;
    for (int i = 0; i < n; ++i) {
        double xa = a.next();
        double xb = b.next();
        double xc = c.next();
        all_equal = all_equal && (xa == xb);
        any_differ = any_differ || (xa != xc);
        mean += xa;
        var += xa * xa;
    }
    mean /= n;
    var = var / n - mean * mean;
    CHECK(all_equal);       // identical (seed, trajectory) replays exactly
    CHECK(any_differ);      // distinct trajectories decorrelate
    CHECK(mean == Approx(0.0).margin(0.03));
    CHECK(var == Approx(1.0).margin(0.05));
}

TEST_CASE("overdamped equilibrium ensemble variance")
{
    auto p = table_overdamped(0.0);
    mc_config cfg;
    cfg.n_traj = 20000;
    cfg.steps_per_period = 500;
    cfg.burn_in_periods = 3;
    cfg.n_samples = 20;
    cfg.seed = 99;
    auto stats = simulate_overdamped(p, nominal_control(p), cfg);
    for (auto const& s : stats.samples) {
        CHECK(std::abs(s.var_x - 1.0) < 3 * s.se_var_x + 0.002);
    }
    CHECK(stats.mean_W == 0.0);  // qdot identically zero
}

TEST_CASE("overdamped ensemble variance tracks the moment ODE")
{
    double eps = 0.1;
    auto p = table_overdamped(eps);
    auto c = optimal_profile(p);
    mc_config cfg;
    cfg.n_traj = 20000;
    cfg.steps_per_period = 1000;
    cfg.burn_in_periods = 4;
    cfg.n_samples = 25;
    cfg.seed = 7;
    auto stats = simulate_overdamped(p, c, cfg);

    integrator_options opts;
    opts.steps_per_period = 1000;
    auto traj = integrate_to_periodic_steady_state(p, c, opts);

    int hits = 0;
    for (auto const& s : stats.samples) {
        auto idx = static_cast<std::size_t>(
            std::llround(s.t / p.period() * opts.steps_per_period));
        double ode_var = traj.cov[idx].s11;
        if (std::abs(s.var_x - ode_var) < 3 * s.se_var_x) {
            ++hits;
        }
    }
    // 3-sigma rule: expect ~99.7%, require a conservative 90% of 25
    CHECK(hits >= 23);
}

TEST_CASE("underdamped equipartition")
{
    auto p = table_underdamped(0.0);
    mc_config cfg;
    cfg.n_traj = 10000;
    cfg.steps_per_period = 4000;
    cfg.burn_in_periods = 3;
    cfg.n_samples = 10;
    cfg.seed = 3;
    auto stats = simulate_underdamped(p, nominal_control(p), cfg);
    for (auto const& s : stats.samples) {
        CHECK(std::abs(s.var_v - 1.0) < 3 * s.se_var_v + 0.005);
        CHECK(std::abs(s.var_x - 0.1) < 3 * s.se_var_x + 0.0005);
    }
}

TEST_CASE("underdamped mean heat rate matches the moment expression")
{
    double eps = 0.1;
    auto p = table_underdamped(eps);
    auto c = optimal_profile(p);
    mc_config cfg;
    cfg.n_traj = 20000;
    // fine steps: Euler-Maruyama inflates the velocity variance by O(dt)
    cfg.steps_per_period = 8000;
    cfg.burn_in_periods = 4;
    cfg.n_samples = 20;
    cfg.seed = 21;
    auto stats = simulate_underdamped(p, c, cfg);

    integrator_options opts;
    opts.steps_per_period = 8000;
    auto traj = integrate_to_periodic_steady_state(p, c, opts);

    // E[v^2] determines the mean heat rate gamma (k_B T/m - E[v^2]); compare
    // the measured second moment against the ODE at each sample
    int hits = 0;
    for (auto const& s : stats.samples) {
        auto idx = static_cast<std::size_t>(
            std::llround(s.t / p.period() * opts.steps_per_period));
        if (std::abs(s.var_v - traj.cov[idx].s22) < 3 * s.se_var_v) {
            ++hits;
        }
    }
    CHECK(hits >= 18);
}

TEST_CASE("first law residual shrinks linearly in dt")
{
    double eps = 0.1;
    auto p = table_overdamped(eps);
    auto c = optimal_profile(p);
    mc_config coarse;
    coarse.n_traj = 4000;
    coarse.steps_per_period = 250;
    coarse.burn_in_periods = 2;
    coarse.n_samples = 10;
    coarse.seed = 5;
    auto fine = coarse;
    fine.steps_per_period = 500;

    auto st_coarse = simulate_overdamped(p, c, coarse);
    auto st_fine = simulate_overdamped(p, c, fine);
    double slope = first_law_convergence_slope(st_coarse, st_fine);
    CHECK(slope == Approx(1.0).margin(0.35));

    auto audit = first_law_audit(st_fine);
    CHECK(audit.mean_abs_residual > 0);
    CHECK(audit.mean_abs_residual < 1e-2);
}

TEST_CASE("static run: W zero and the first law telescopes exactly")
{
    // with q constant the midpoint heat sums to 1/2 q (x_N^2 - x_0^2), so
    // the residual is pure round-off
    auto p = table_overdamped(0.0);
    mc_config cfg;
    cfg.n_traj = 2000;
    cfg.steps_per_period = 400;
    cfg.burn_in_periods = 1;
    cfg.seed = 11;
    auto st = simulate_overdamped(p, nominal_control(p), cfg);
    CHECK(st.mean_W == 0.0);
    CHECK(st.max_abs_residual < 1e-11);
}

TEST_CASE("determinism: same seed reproduces bit-identical statistics")
{
    auto p = table_overdamped(0.2);
    auto c = optimal_profile(p);
    mc_config cfg;
    cfg.n_traj = 3000;
    cfg.steps_per_period = 300;
    cfg.burn_in_periods = 1;
    cfg.seed = 1234;
    auto a = simulate_overdamped(p, c, cfg);
    auto b = simulate_overdamped(p, c, cfg);
    CHECK(a.mean_W == b.mean_W);
    CHECK(a.mean_Q == b.mean_Q);
    CHECK(a.mean_abs_residual == b.mean_abs_residual);
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].var_x == b.samples[i].var_x);
    }
}

TEST_CASE("estimator variance shrinks with ensemble size")
{
    auto p = table_overdamped(0.0);
    mc_config small;
    small.n_traj = 2000;
    small.steps_per_period = 300;
    small.burn_in_periods = 1;
    small.n_samples = 5;
    small.seed = 77;
    auto big = small;
    big.n_traj = 8000;
    auto st_small = simulate_overdamped(p, nominal_control(p), small);
    auto st_big = simulate_overdamped(p, nominal_control(p), big);
    // standard errors scale as 1/sqrt(n): factor 2 between the runs
    for (std::size_t i = 0; i < st_small.samples.size(); ++i) {
        CHECK(st_small.samples[i].se_var_x ==
              Approx(2 * st_big.samples[i].se_var_x).epsilon(0.2));
    }
}

TEST_CASE("unstable control triggers the overflow guard")
{
    auto p = table_overdamped(1.0);
    auto c = control_profile::make(p.q0, 12.0, 0.0, 1.0);  // q(t) deeply negative
    mc_config cfg;
    cfg.n_traj = 50;
    cfg.steps_per_period = 2000;
    cfg.burn_in_periods = 30;
    cfg.seed = 2;
    cfg.overflow_guard = 1e4;
    CHECK_THROWS_AS(simulate_overdamped(p, c, cfg), mc_unstable);
}

TEST_CASE("overdamped limit of the underdamped simulator")
{
    double eps = 0.2;
    auto po = table_overdamped(eps);
    auto c = optimal_profile(po);
    auto pu = po;
    pu.m = 1e-3;
    mc_config cfg;
    cfg.n_traj = 20000;
    cfg.steps_per_period = 20000;  // resolve the m/gamma time scale
    cfg.burn_in_periods = 2;
    cfg.n_samples = 10;
    cfg.seed = 31;
    auto st_u = simulate_underdamped(pu, c, cfg);
    mc_config cfg_o = cfg;
    cfg_o.steps_per_period = 2000;
    auto st_o = simulate_overdamped(po, c, cfg_o);
    // cycle work (on the particle) agrees within 10%
    CHECK(st_u.mean_W == Approx(st_o.mean_W).epsilon(0.10));
}

TEST_CASE("mc CSV serialization")
{
    auto p = table_overdamped(0.1);
    auto c = optimal_profile(p);
    mc_config cfg;
    cfg.n_traj = 500;
    cfg.steps_per_period = 200;
    cfg.burn_in_periods = 1;
    cfg.n_samples = 4;
    cfg.seed = 8;
    auto st = simulate_overdamped(p, c, cfg);
    std::ostringstream os;
    write_mc_csv(os, p, c, st);
    auto text = os.str();
    CHECK(text.find("t,mean_x,var_x,se_var_x\n") != std::string::npos);
    CHECK(text.find("seed=8") != std::string::npos);
}

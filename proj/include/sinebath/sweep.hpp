#ifndef SINEBATH_SWEEP_HPP
#define SINEBATH_SWEEP_HPP

#include <atomic>
#include <cmath>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "sinebath/model.hpp"
#include "sinebath/moments.hpp"
#include "sinebath/perturbation.hpp"
#include "sinebath/spectral.hpp"
#include "sinebath/thermo.hpp"

namespace sinebath {

// Parameter sweeps over (q1, phi), efficiency-vs-T1 curves and analytic vs
// numeric convergence tables. Grid cells are evaluated concurrently but
// always emitted in grid index order.

enum class sweep_solver { spectral, time_domain };

struct grid_spec {
    double q1_min = 0, q1_max = 1;
    int n_q1 = 101;
    double phi_min = -std::numbers::pi, phi_max = std::numbers::pi;
    int n_phi = 101;
};

struct sweep_cell {
    double q1 = 0;
    double phi = 0;
    double power = 0;
    bool ok = false;
    std::string failure;  // tagged reason when !ok
    double condition_estimate = 0;
};

struct sweep_grid {
    grid_spec spec;
    sweep_solver solver = sweep_solver::spectral;
    std::vector<sweep_cell> cells;  // row-major, q1 outer, phi inner
    long argmax_index = -1;
    double max_power = 0;
    optimal_control analytic;  // the perturbation-theory marker
    double argmax_q1 = 0;
    double argmax_phi = 0;

    sweep_cell const& at(int iq, int ip) const
    {
        return cells[static_cast<std::size_t>(iq) * spec.n_phi + ip];
    }
};

namespace detail_sweep {

inline double cell_power(engine_params const& p, control_profile const& c,
                         sweep_solver solver, int modes,
                         integrator_options const& topts, double* cond)
{
    if (solver == sweep_solver::spectral) {
        auto sol = solve_spectral(p, c, modes);
        if (cond) {
            *cond = sol.condition_estimate;
        }
        return spectral_power(sol);
    }
    auto traj = integrate_to_periodic_steady_state(p, c, topts);
    if (cond) {
        *cond = 0;
    }
    return p.omega / (2 * std::numbers::pi) * cycle_work(p, c, traj);
}

template <typename Fn>
inline void parallel_for(long n, Fn const& fn)
{
    unsigned hw = std::thread::hardware_concurrency();
    unsigned n_threads = hw ? hw : 4;
    std::vector<std::thread> pool;
    std::atomic<long> next{0};
    for (unsigned t = 0; t < n_threads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                long i = next.fetch_add(1);
                if (i >= n) {
                    return;
                }
                fn(i);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
}

}  // namespace detail_sweep

// Evaluate power on every grid cell; report numeric argmax next to the
// analytic optimum.
inline sweep_grid sweep_power(engine_params const& p, grid_spec const& spec,
                              sweep_solver solver = sweep_solver::spectral,
                              int modes = 100,
                              integrator_options const& topts = {})
{
    require_valid(p);
    if (spec.n_q1 < 1 || spec.n_phi < 1) {
        throw invalid_params("sweep grid must be nonempty");
    }
    sweep_grid grid;
    grid.spec = spec;
    grid.solver = solver;
    grid.analytic = p.overdamped() ? overdamped_optimum(p) : underdamped_optimum(p);
    long const n_cells = static_cast<long>(spec.n_q1) * spec.n_phi;
    grid.cells.resize(static_cast<std::size_t>(n_cells));

    double dq = spec.n_q1 > 1 ? (spec.q1_max - spec.q1_min) / (spec.n_q1 - 1) : 0;
    double dphi = spec.n_phi > 1 ? (spec.phi_max - spec.phi_min) / (spec.n_phi - 1) : 0;

    detail_sweep::parallel_for(n_cells, [&](long i) {
        int iq = static_cast<int>(i / spec.n_phi);
        int ip = static_cast<int>(i % spec.n_phi);
        auto& cell = grid.cells[static_cast<std::size_t>(i)];
        cell.q1 = spec.q1_min + iq * dq;
        cell.phi = spec.phi_min + ip * dphi;
        try {
            auto c = control_profile::make(p.q0, cell.q1, cell.phi, p.epsilon);
            cell.power = detail_sweep::cell_power(p, c, solver, modes, topts,
                                                  &cell.condition_estimate);
            cell.ok = true;
        } catch (std::exception const& e) {
            cell.ok = false;
            cell.failure = e.what();
        }
    });

    for (long i = 0; i < n_cells; ++i) {
        auto const& cell = grid.cells[static_cast<std::size_t>(i)];
        if (cell.ok && (grid.argmax_index < 0 || cell.power > grid.max_power)) {
            grid.argmax_index = i;
            grid.max_power = cell.power;
            grid.argmax_q1 = cell.q1;
            grid.argmax_phi = cell.phi;
        }
    }
    return grid;
}

struct efficiency_point {
    double T1 = 0;
    double eta_numeric = 0;
    double eta_analytic = 0;
    double power_numeric = 0;
    bool degenerate = false;
    bool ok = false;
    std::string failure;
};

// For each T1: recompute the analytic optimum, solve numerically, and pair
// the thermo-accounting efficiency with the first-order formula.
inline std::vector<efficiency_point> efficiency_curve(
    engine_params const& base, std::vector<double> const& T1_values, double eps,
    sweep_solver solver = sweep_solver::spectral, int modes = 100,
    integrator_options const& topts = {})
{
    std::vector<efficiency_point> out(T1_values.size());
    for (std::size_t i = 0; i < T1_values.size(); ++i) {
        auto& pt = out[i];
        pt.T1 = T1_values[i];
        engine_params p = base;
        p.T1 = pt.T1;
        p.epsilon = eps;
        try {
            require_valid(p);
            optimal_control oc;
            efficiency_report ana;
            if (p.overdamped()) {
                oc = overdamped_optimum(p);
                ana = overdamped_efficiency(p);
            } else {
                oc = underdamped_optimum(p);
                ana = underdamped_efficiency(p);
            }
            pt.eta_analytic = ana.eta;
            auto c = control_profile::make(p.q0, oc.q1_star, oc.phi_star, eps);
            covariance_trajectory traj;
            if (solver == sweep_solver::spectral) {
                auto sol = solve_spectral(p, c, modes);
                traj = reconstruct_trajectory(sol, 4096);
            } else {
                traj = integrate_to_periodic_steady_state(p, c, topts);
            }
            auto rep = analyze_cycle(p, c, traj);
            pt.eta_numeric = rep.eta;
            pt.power_numeric = rep.power;
            pt.degenerate = rep.degenerate;
            pt.ok = true;
        } catch (std::exception const& e) {
            pt.ok = false;
            pt.failure = e.what();
        }
    }
    return out;
}

struct compare_row {
    double epsilon = 0;
    double power_numeric = 0;
    double power_analytic = 0;
    double power_error = 0;
    double eta_numeric = 0;
    double eta_analytic = 0;
    double eta_error = 0;
};

struct compare_table {
    std::vector<compare_row> rows;
    double power_slope = 0;  // log-log fit, expected >= ~3
    double eta_slope = 0;    // expected >= ~2
};

namespace detail_sweep {

inline double loglog_slope(std::vector<double> const& x, std::vector<double> const& y)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] <= 0) {
            continue;
        }
        double lx = std::log(x[i]);
        double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    double dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

}  // namespace detail_sweep

// For each eps in a decreasing list, compare the numeric power/efficiency at
// the analytic optimum to the perturbation formulas and fit log-log error
// slopes against eps.
inline compare_table compare_report(engine_params const& base,
                                    std::vector<double> const& eps_list,
                                    int modes = 100)
{
    compare_table table;
    std::vector<double> eps_ok, perr, eerr;
    for (double eps : eps_list) {
        engine_params p = base;
        p.epsilon = eps;
        require_valid(p);
        compare_row row;
        row.epsilon = eps;
        optimal_control oc;
        efficiency_report ana;
        if (p.overdamped()) {
            oc = overdamped_optimum(p);
            ana = overdamped_efficiency(p);
        } else {
            oc = underdamped_optimum(p);
            ana = underdamped_efficiency(p);
        }
        row.power_analytic = oc.power_leading;
        row.eta_analytic = ana.eta;
        auto c = control_profile::make(p.q0, oc.q1_star, oc.phi_star, eps);
        auto sol = solve_spectral(p, c, modes);
        row.power_numeric = spectral_power(sol);
        auto traj = reconstruct_trajectory(sol, 4096);
        auto rep = analyze_cycle(p, c, traj);
        row.eta_numeric = rep.eta;
        row.power_error = std::abs(row.power_numeric - row.power_analytic);
        row.eta_error = std::abs(row.eta_numeric - row.eta_analytic);
        table.rows.push_back(row);
        eps_ok.push_back(eps);
        perr.push_back(row.power_error);
        eerr.push_back(row.eta_error);
    }
    table.power_slope = detail_sweep::loglog_slope(eps_ok, perr);
    table.eta_slope = detail_sweep::loglog_slope(eps_ok, eerr);
    return table;
}

// ---------------------------------------------------------------------------
// CSV emission (timestamp-free by default for golden-file testing)
// ---------------------------------------------------------------------------

inline void write_sweep_csv(std::ostream& os, engine_params const& p,
                            sweep_grid const& grid)
{
    os << "# model=" << (p.overdamped() ? "overdamped" : "underdamped")
       << " m=" << p.m << " gamma=" << p.gamma << " k_B=" << p.k_B
       << " omega=" << p.omega << " T0=" << p.T0 << " T1=" << p.T1
       << " q0=" << p.q0 << " epsilon=" << p.epsilon << "\n";
    os << "# solver=" << (grid.solver == sweep_solver::spectral ? "spectral"
                                                                : "time_domain")
       << " argmax_q1=" << grid.argmax_q1 << " argmax_phi=" << grid.argmax_phi
       << " max_power=" << grid.max_power
       << " analytic_q1=" << grid.analytic.q1_star
       << " analytic_phi=" << grid.analytic.phi_star
       << " analytic_power=" << grid.analytic.power_leading << "\n";
    os << "q1,phi,power,status,condition_estimate\n";
    for (auto const& cell : grid.cells) {
        os << cell.q1 << "," << cell.phi << ",";
        if (cell.ok) {
            os << cell.power << ",ok," << cell.condition_estimate << "\n";
        } else {
            os << "nan,failed:" << cell.failure << "," << cell.condition_estimate
               << "\n";
        }
    }
}

inline void write_efficiency_csv(std::ostream& os, engine_params const& p,
                                 std::vector<efficiency_point> const& curve,
                                 double eps)
{
    os << "# model=" << (p.overdamped() ? "overdamped" : "underdamped")
       << " m=" << p.m << " gamma=" << p.gamma << " omega=" << p.omega
       << " T0=" << p.T0 << " q0=" << p.q0 << " epsilon=" << eps << "\n";
    os << "T1,eta_numeric,eta_analytic,power_numeric,status\n";
    for (auto const& pt : curve) {
        os << pt.T1 << ",";
        if (pt.ok) {
            os << pt.eta_numeric << "," << pt.eta_analytic << "," << pt.power_numeric
               << "," << (pt.degenerate ? "degenerate" : "ok") << "\n";
        } else {
            os << "nan,nan,nan,failed:" << pt.failure << "\n";
        }
    }
}

inline void write_compare_csv(std::ostream& os, engine_params const& p,
                              compare_table const& table)
{
    os << "# model=" << (p.overdamped() ? "overdamped" : "underdamped")
       << " m=" << p.m << " gamma=" << p.gamma << " omega=" << p.omega
       << " T0=" << p.T0 << " T1=" << p.T1 << " q0=" << p.q0 << "\n";
    os << "# power_slope=" << table.power_slope << " eta_slope=" << table.eta_slope
       << "\n";
    os << "epsilon,power_numeric,power_analytic,power_error,eta_numeric,"
          "eta_analytic,eta_error\n";
    for (auto const& r : table.rows) {
        os << r.epsilon << "," << r.power_numeric << "," << r.power_analytic << ","
           << r.power_error << "," << r.eta_numeric << "," << r.eta_analytic << ","
           << r.eta_error << "\n";
    }
}

}  // namespace sinebath

#endif  // SINEBATH_SWEEP_HPP

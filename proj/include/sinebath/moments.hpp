#ifndef SINEBATH_MOMENTS_HPP
#define SINEBATH_MOMENTS_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "sinebath/model.hpp"

namespace sinebath {

// Time-domain integration of the exact covariance (Lyapunov) ODEs for both
// models, relaxation to the periodic steady state, and Floquet stability of
// the homogeneous dynamics.

struct integrator_options {
    int steps_per_period = 10000;
    int max_cycles = 200;
    double steady_tol = 1e-10;
    bool check_step = false;  // verify period-end state against a halved step
};

// One covariance sample; overdamped uses s11 only.
struct cov_state {
    double s11 = 0;
    double s12 = 0;
    double s22 = 0;

    friend cov_state operator+(cov_state a, cov_state b)
    {
        return {a.s11 + b.s11, a.s12 + b.s12, a.s22 + b.s22};
    }
    friend cov_state operator*(double k, cov_state a)
    {
        return {k * a.s11, k * a.s12, k * a.s22};
    }
};

struct covariance_trajectory {
    model_tag model = model_tag::overdamped;
    std::vector<double> t;        // uniform grid, n_steps + 1 points, one period
    std::vector<cov_state> cov;   // samples at the grid points

    std::size_t size() const { return t.size(); }
    double span() const { return t.back() - t.front(); }
};

// dSigma/dt = -(2/gamma) q(t) Sigma + (2/gamma) k_B T(t)
inline double overdamped_rhs(engine_params const& p, control_profile const& c,
                             double t, double sigma)
{
    return -(2.0 / p.gamma) * control_at(c, p.omega, t) * sigma +
           (2.0 / p.gamma) * p.k_B * temperature_at(p, t);
}

// Symmetric 2x2 Lyapunov rhs propagated as (s11, s12, s22):
//   d s11 = 2 s12
//   d s12 = s22 - (q/m) s11 - (gamma/m) s12
//   d s22 = -2 (q/m) s12 - 2 (gamma/m) s22 + 2 gamma k_B T / m^2
inline cov_state underdamped_rhs(engine_params const& p, control_profile const& c,
                                 double t, cov_state const& s)
{
    if (!(p.m > 0)) {
        throw invalid_params("underdamped dynamics require m > 0");
    }
    double q = control_at(c, p.omega, t);
    double im = 1.0 / p.m;
    cov_state d;
    d.s11 = 2 * s.s12;
    d.s12 = s.s22 - q * im * s.s11 - p.gamma * im * s.s12;
    d.s22 = -2 * q * im * s.s12 - 2 * p.gamma * im * s.s22 +
            2 * p.gamma * p.k_B * temperature_at(p, t) * im * im;
    return d;
}

// Model-dispatched rhs on the 3-component state (overdamped ignores s12, s22).
inline cov_state moment_rhs(engine_params const& p, control_profile const& c,
                            double t, cov_state const& s)
{
    if (p.overdamped()) {
        return {overdamped_rhs(p, c, t, s.s11), 0.0, 0.0};
    }
    return underdamped_rhs(p, c, t, s);
}

// Static-bath stationary state: k_B T0/q0 (and equipartition k_B T0/m).
inline cov_state equilibrium_state(engine_params const& p)
{
    cov_state s;
    s.s11 = p.k_B * p.T0 / p.q0;
    if (!p.overdamped()) {
        s.s22 = p.k_B * p.T0 / p.m;
    }
    return s;
}

namespace detail {

inline cov_state rk4_step(engine_params const& p, control_profile const& c, double t,
                          double dt, cov_state const& s)
{
    cov_state k1 = moment_rhs(p, c, t, s);
    cov_state k2 = moment_rhs(p, c, t + dt / 2, s + (dt / 2) * k1);
    cov_state k3 = moment_rhs(p, c, t + dt / 2, s + (dt / 2) * k2);
    cov_state k4 = moment_rhs(p, c, t + dt, s + dt * k3);
    return s + (dt / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline bool positive_definite(model_tag m, cov_state const& s)
{
    if (m == model_tag::overdamped) {
        return s.s11 > 0;
    }
    return s.s11 > 0 && s.s22 > 0 && s.s11 * s.s22 - s.s12 * s.s12 > 0;
}

inline double cov_norm(cov_state const& s)
{
    return std::sqrt(s.s11 * s.s11 + 2 * s.s12 * s.s12 + s.s22 * s.s22);
}

// Integrate whole periods until the start-to-end relative defect is small.
inline cov_state relax_periods(engine_params const& p, control_profile const& c,
                               integrator_options const& o, cov_state s0,
                               model_tag tag)
{
    double const period = p.period();
    double const dt = period / o.steps_per_period;
    cov_state s = s0;
    for (int cycle = 0; cycle < o.max_cycles; ++cycle) {
        cov_state start = s;
        for (int i = 0; i < o.steps_per_period; ++i) {
            double t = i * dt;  // drive is periodic, per-cycle time is enough
            s = rk4_step(p, c, t, dt, s);
            if (!positive_definite(tag, s)) {
                throw no_convergence(
                    "covariance lost positive definiteness at t = " +
                    std::to_string(t + dt) + " (cycle " + std::to_string(cycle) +
                    "); control likely destabilizing");
            }
        }
        double defect = cov_norm(s + (-1.0) * start) /
                        std::max(cov_norm(s), 1e-300);
        if (defect <= o.steady_tol) {
            // two settle cycles shrink the defect well below steady_tol,
            // keeping the cycle first-law residual within quadrature noise
            for (int extra = 0; extra < 2 && cycle + 1 + extra < o.max_cycles;
                 ++extra) {
                for (int i = 0; i < o.steps_per_period; ++i) {
                    s = rk4_step(p, c, i * dt, dt, s);
                }
            }
            return s;
        }
    }
    throw no_convergence("periodic steady state not reached after " +
                         std::to_string(o.max_cycles) + " cycles");
}

}  // namespace detail

// Relax to the periodic steady state from the static-bath stationary state,
// then record one period of samples on the uniform grid.
inline covariance_trajectory integrate_to_periodic_steady_state(
    engine_params const& p, control_profile const& c, integrator_options const& o)
{
    require_valid(p);
    model_tag tag = p.overdamped() ? model_tag::overdamped : model_tag::underdamped;
    double const period = p.period();
    double const dt = period / o.steps_per_period;

    cov_state s = detail::relax_periods(p, c, o, equilibrium_state(p), tag);

    if (o.check_step) {
        integrator_options fine = o;
        fine.steps_per_period = 2 * o.steps_per_period;
        fine.check_step = false;
        cov_state s2 = detail::relax_periods(p, c, fine, equilibrium_state(p), tag);
        double diff = detail::cov_norm(s + (-1.0) * s2) /
                      std::max(detail::cov_norm(s), 1e-300);
        if (diff > 10 * o.steady_tol) {
            throw step_too_coarse("halving the step moves the period-end state by " +
                                  std::to_string(diff));
        }
    }

    covariance_trajectory traj;
    traj.model = tag;
    traj.t.reserve(o.steps_per_period + 1);
    traj.cov.reserve(o.steps_per_period + 1);
    for (int i = 0; i <= o.steps_per_period; ++i) {
        traj.t.push_back(i * dt);
        traj.cov.push_back(s);
        if (i < o.steps_per_period) {
            s = detail::rk4_step(p, c, i * dt, dt, s);
            if (!detail::positive_definite(tag, s)) {
                throw no_convergence("covariance lost positive definiteness at t = " +
                                     std::to_string((i + 1) * dt));
            }
        }
    }
    return traj;
}

namespace detail {

// Homogeneous part of the covariance dynamics (temperature forcing dropped),
// acting on vectorized symmetric matrices (s11, s12, s22).
inline cov_state homogeneous_rhs(engine_params const& p, control_profile const& c,
                                 double t, cov_state const& s)
{
    if (p.overdamped()) {
        return {-(2.0 / p.gamma) * control_at(c, p.omega, t) * s.s11, 0.0, 0.0};
    }
    double q = control_at(c, p.omega, t);
    double im = 1.0 / p.m;
    cov_state d;
    d.s11 = 2 * s.s12;
    d.s12 = s.s22 - q * im * s.s11 - p.gamma * im * s.s12;
    d.s22 = -2 * q * im * s.s12 - 2 * p.gamma * im * s.s22;
    return d;
}

inline cov_state homogeneous_rk4(engine_params const& p, control_profile const& c,
                                 double t, double dt, cov_state const& s)
{
    cov_state k1 = homogeneous_rhs(p, c, t, s);
    cov_state k2 = homogeneous_rhs(p, c, t + dt / 2, s + (dt / 2) * k1);
    cov_state k3 = homogeneous_rhs(p, c, t + dt / 2, s + (dt / 2) * k2);
    cov_state k4 = homogeneous_rhs(p, c, t + dt, s + dt * k3);
    return s + (dt / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Largest eigenvalue magnitude of a real 3x3 matrix via the characteristic
// cubic, solved with Cardano's method.
inline double spectral_radius_3x3(std::array<std::array<double, 3>, 3> const& M)
{
    double tr = M[0][0] + M[1][1] + M[2][2];
    double c1 = 0;  // sum of principal 2x2 minors
    c1 += M[0][0] * M[1][1] - M[0][1] * M[1][0];
    c1 += M[0][0] * M[2][2] - M[0][2] * M[2][0];
    c1 += M[1][1] * M[2][2] - M[1][2] * M[2][1];
    double det = M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
                 M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
                 M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
    // lambda^3 - tr lambda^2 + c1 lambda - det = 0; shift x = lambda - tr/3
    double a = c1 - tr * tr / 3;
    double b = -det + tr * c1 / 3 - 2 * tr * tr * tr / 27;
    std::complex<double> disc = std::sqrt(std::complex<double>(b * b / 4 + a * a * a / 27));
    std::complex<double> u = std::pow(-b / 2 + disc, 1.0 / 3.0);
    if (std::abs(u) < 1e-300) {
        u = std::pow(-b / 2 - disc, 1.0 / 3.0);
    }
    double radius = 0;
    if (std::abs(u) < 1e-300) {
        radius = std::abs(tr / 3);  // triple root
    } else {
        std::complex<double> w(-0.5, std::sqrt(3.0) / 2);
        for (int k = 0; k < 3; ++k) {
            std::complex<double> uk = u * std::pow(w, k);
            std::complex<double> lam = uk - a / (3.0 * uk) + tr / 3.0;
            radius = std::max(radius, std::abs(lam));
        }
    }
    return radius;
}

}  // namespace detail

// Spectral radius of the one-period monodromy map of the homogeneous
// covariance dynamics. Scalar exponential for the overdamped model; 3x3 map
// on (s11, s12, s22) for the underdamped one.
inline double floquet_stability(engine_params const& p, control_profile const& c,
                                integrator_options const& o)
{
    // q0 = 0 is admitted here: the homogeneous map is still well defined and
    // marginal cases (spectral radius 1) are part of what this probes
    if (!(p.gamma > 0) || !(p.omega > 0) || !(p.m >= 0)) {
        throw invalid_params("floquet stability requires gamma, omega > 0 and m >= 0");
    }
    double const period = p.period();
    double const dt = period / o.steps_per_period;
    if (p.overdamped()) {
        cov_state s{1.0, 0.0, 0.0};
        for (int i = 0; i < o.steps_per_period; ++i) {
            s = detail::homogeneous_rk4(p, c, i * dt, dt, s);
        }
        return std::abs(s.s11);
    }
    // propagate the three basis states to assemble the monodromy matrix
    std::array<std::array<double, 3>, 3> M{};
    for (int col = 0; col < 3; ++col) {
        cov_state s{col == 0 ? 1.0 : 0.0, col == 1 ? 1.0 : 0.0, col == 2 ? 1.0 : 0.0};
        for (int i = 0; i < o.steps_per_period; ++i) {
            s = detail::homogeneous_rk4(p, c, i * dt, dt, s);
        }
        M[0][col] = s.s11;
        M[1][col] = s.s12;
        M[2][col] = s.s22;
    }
    return detail::spectral_radius_3x3(M);
}

// CSV serialization: columns t,Sigma (overdamped) or t,S11,S12,S22, with a
// '#' metadata header.
inline void write_trajectory_csv(std::ostream& os, engine_params const& p,
                                 control_profile const& c,
                                 integrator_options const& o,
                                 covariance_trajectory const& traj)
{
    os << "# model=" << to_string(traj.model) << " m=" << p.m
       << " gamma=" << p.gamma << " k_B=" << p.k_B << " omega=" << p.omega
       << " T0=" << p.T0 << " T1=" << p.T1 << " q0=" << c.q0 << " q1=" << c.q1
       << " phi=" << c.phi << " epsilon=" << p.epsilon << "\n";
    os << "# steps_per_period=" << o.steps_per_period
       << " steady_tol=" << o.steady_tol << " max_cycles=" << o.max_cycles << "\n";
    if (traj.model == model_tag::overdamped) {
        os << "t,Sigma\n";
        for (std::size_t i = 0; i < traj.size(); ++i) {
            os << traj.t[i] << "," << traj.cov[i].s11 << "\n";
        }
    } else {
        os << "t,S11,S12,S22\n";
        for (std::size_t i = 0; i < traj.size(); ++i) {
            os << traj.t[i] << "," << traj.cov[i].s11 << "," << traj.cov[i].s12
               << "," << traj.cov[i].s22 << "\n";
        }
    }
}

}  // namespace sinebath

#endif  // SINEBATH_MOMENTS_HPP

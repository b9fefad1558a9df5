#ifndef SINEBATH_THERMO_HPP
#define SINEBATH_THERMO_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include "sinebath/model.hpp"
#include "sinebath/moments.hpp"

namespace sinebath {

// Ensemble thermodynamic bookkeeping on a periodic covariance trajectory:
// extracted work, signed heat split, power and efficiency. Independent of
// how the trajectory was produced (time-domain or spectral reconstruction).

struct cycle_report {
    double W = 0;      // extracted work per cycle
    double Qh = 0;     // heat in per cycle, >= 0
    double Qc = 0;     // heat out per cycle, >= 0
    double power = 0;  // (omega / 2 pi) W
    double eta = 0;    // W / Qh, 0 when degenerate
    bool degenerate = false;
    std::vector<double> zero_crossings;  // heat-rate sign changes within the period
};

namespace detail {

inline void require_one_period(engine_params const& p,
                               covariance_trajectory const& traj)
{
    double period = p.period();
    if (std::abs(traj.span() - period) > 1e-9 * period) {
        throw period_mismatch("trajectory span does not equal one period");
    }
}

inline void require_model_match(engine_params const& p,
                                covariance_trajectory const& traj)
{
    bool od = traj.model == model_tag::overdamped;
    if (od != p.overdamped()) {
        throw model_mismatch("trajectory model does not match parameters (m = " +
                             std::to_string(p.m) + ")");
    }
}

// Cubic Hermite interpolation of the covariance between grid samples, using
// the exact ODE rhs as the slope at the nodes.
class cov_interpolant {
public:
    cov_interpolant(engine_params const& p, control_profile const& c,
                    covariance_trajectory const& traj)
        : p_(p), c_(c), traj_(traj), dt_(traj.t[1] - traj.t[0])
    {
    }

    cov_state operator()(double t) const
    {
        auto const& ts = traj_.t;
        double x = (t - ts.front()) / dt_;
        auto i = static_cast<std::size_t>(std::floor(x));
        if (i >= traj_.size() - 1) {
            i = traj_.size() - 2;
        }
        double u = (t - ts[i]) / dt_;
        cov_state const& s0 = traj_.cov[i];
        cov_state const& s1 = traj_.cov[i + 1];
        cov_state d0 = moment_rhs(p_, c_, ts[i], s0);
        cov_state d1 = moment_rhs(p_, c_, ts[i + 1], s1);
        double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
        double h10 = u * (1 - u) * (1 - u);
        double h01 = u * u * (3 - 2 * u);
        double h11 = u * u * (u - 1);
        return h00 * s0 + (h10 * dt_) * d0 + h01 * s1 + (h11 * dt_) * d1;
    }

private:
    engine_params const& p_;
    control_profile const& c_;
    covariance_trajectory const& traj_;
    double dt_;
};

// Composite Simpson on a uniform grid of f-samples (even interval count).
inline double simpson_uniform(std::vector<double> const& f, double dt)
{
    std::size_t n = f.size() - 1;
    double acc = 0;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc += f[i] + 4 * f[i + 1] + f[i + 2];
    }
    double result = acc * dt / 3;
    if (i < n) {  // one trailing interval: trapezoid (grids here are even anyway)
        result += 0.5 * dt * (f[i] + f[i + 1]);
    }
    return result;
}

// Adaptive-free Simpson over [a, b] with n subintervals of a callable.
inline double simpson_callable(std::function<double(double)> const& f, double a,
                               double b, int n)
{
    if (n % 2 != 0) {
        ++n;
    }
    double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) {
        acc += f(a + i * h) * (i % 2 == 1 ? 4 : 2);
    }
    return acc * h / 3;
}

}  // namespace detail

// W = -1/2 * integral over one period of qdot(t) * Sigma11(t) dt.
inline double cycle_work(engine_params const& p, control_profile const& c,
                         covariance_trajectory const& traj)
{
    detail::require_one_period(p, traj);
    double dt = traj.t[1] - traj.t[0];
    std::vector<double> f(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        f[i] = -0.5 * control_rate_at(c, p.omega, traj.t[i]) * traj.cov[i].s11;
    }
    return detail::simpson_uniform(f, dt);
}

// Ensemble heat exchange rate at a covariance state:
//   overdamped:  1/2 q(t) Sigmadot(t), with Sigmadot from the ODE rhs
//   underdamped: gamma (k_B T(t)/m - Sigma22(t))
inline double heat_rate(engine_params const& p, control_profile const& c,
                        model_tag model, double t, cov_state const& s)
{
    if (model == model_tag::overdamped) {
        if (!p.overdamped()) {
            throw model_mismatch("overdamped heat rate with m > 0 parameters");
        }
        return 0.5 * control_at(c, p.omega, t) * overdamped_rhs(p, c, t, s.s11);
    }
    if (p.overdamped()) {
        throw model_mismatch("underdamped heat rate with m = 0 parameters");
    }
    return p.gamma * (p.k_B * temperature_at(p, t) / p.m - s.s22);
}

inline double heat_rate(engine_params const& p, control_profile const& c,
                        covariance_trajectory const& traj, double t)
{
    detail::require_model_match(p, traj);
    detail::cov_interpolant interp(p, c, traj);
    return heat_rate(p, c, traj.model, t, interp(t));
}

struct heat_split {
    double Qh = 0;
    double Qc = 0;
    std::vector<double> zero_crossings;
};

// Split the heat integral into inflow/outflow parts. Sign changes are located
// on the sample grid and each bracket refined by bisection to 1e-12
// period-relative accuracy; quadrature splits exactly at the refined roots.
inline heat_split split_heat(engine_params const& p, control_profile const& c,
                             covariance_trajectory const& traj)
{
    detail::require_one_period(p, traj);
    detail::require_model_match(p, traj);
    detail::cov_interpolant interp(p, c, traj);
    auto rate = [&](double t) { return heat_rate(p, c, traj.model, t, interp(t)); };

    double const t0 = traj.t.front();
    double const t_end = traj.t.back();
    double const period = t_end - t0;

    std::vector<double> crossings;
    std::vector<double> rate_samples(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        rate_samples[i] = heat_rate(p, c, traj.model, traj.t[i], traj.cov[i]);
    }
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        double a = rate_samples[i];
        double b = rate_samples[i + 1];
        if (a == 0.0 || (a < 0) == (b < 0)) {
            continue;
        }
        double lo = traj.t[i];
        double hi = traj.t[i + 1];
        double flo = a;
        while (hi - lo > 1e-12 * period) {
            double mid = 0.5 * (lo + hi);
            double fm = rate(mid);
            if (fm == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((fm < 0) == (flo < 0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        crossings.push_back(0.5 * (lo + hi));
    }

    // integrate each smooth segment separately
    std::vector<double> bounds;
    bounds.push_back(t0);
    for (double tc : crossings) {
        bounds.push_back(tc);
    }
    bounds.push_back(t_end);

    heat_split out;
    out.zero_crossings = crossings;
    int const per_segment = static_cast<int>(2 * traj.size());
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
        double a = bounds[k];
        double b = bounds[k + 1];
        if (b - a <= 0) {
            continue;
        }
        double q = detail::simpson_callable(rate, a, b, per_segment);
        if (q >= 0) {
            out.Qh += q;
        } else {
            out.Qc += -q;
        }
    }
    return out;
}

// Assemble the full cycle report for a steady-state trajectory.
inline cycle_report analyze_cycle(engine_params const& p, control_profile const& c,
                                  covariance_trajectory const& traj,
                                  double degenerate_tol = 1e-14)
{
    cycle_report r;
    r.W = cycle_work(p, c, traj);
    auto hs = split_heat(p, c, traj);
    r.Qh = hs.Qh;
    r.Qc = hs.Qc;
    r.zero_crossings = std::move(hs.zero_crossings);
    r.power = p.omega / (2 * std::numbers::pi) * r.W;
    if (r.Qh > degenerate_tol) {
        r.eta = r.W / r.Qh;
    } else {
        r.eta = 0;
        r.degenerate = true;
    }
    return r;
}

// Arithmetic of the definition, for precomputed pieces.
inline cycle_report efficiency(engine_params const& p, double W, double Qh, double Qc,
                               double degenerate_tol = 1e-14)
{
    cycle_report r;
    r.W = W;
    r.Qh = Qh;
    r.Qc = Qc;
    r.power = p.omega / (2 * std::numbers::pi) * W;
    if (Qh > degenerate_tol) {
        r.eta = W / Qh;
    } else {
        r.eta = 0;
        r.degenerate = true;
    }
    return r;
}

}  // namespace sinebath

#endif  // SINEBATH_THERMO_HPP

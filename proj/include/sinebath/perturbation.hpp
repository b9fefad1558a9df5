#ifndef SINEBATH_PERTURBATION_HPP
#define SINEBATH_PERTURBATION_HPP

#include <cmath>
#include <complex>
#include <numbers>

#include "sinebath/model.hpp"

namespace sinebath {

// Closed-form first/second-order perturbation results for both models:
// power-optimal sinusoidal control gain, first-order covariances, heat
// amplitudes and efficiency at maximal power.

struct optimal_control {
    double q1_star = 0;        // optimal harmonic amplitude
    double phi_star = 0;       // optimal phase, (-pi, pi]
    double power_leading = 0;  // eps^2 * leading power coefficient
};

struct efficiency_report {
    double Qh = 0;          // heat in per cycle
    double Qc = 0;          // heat out per cycle
    double W = 0;           // extracted work per cycle
    double eta = 0;         // efficiency W/Qh (0 when degenerate)
    bool degenerate = false;  // Qh == 0, efficiency undefined
    // underdamped intermediates (zero for overdamped reports)
    double kappa = 0;
    double kappa1 = 0;
    double kappa2 = 0;
    // overdamped leading-order heat zero crossings
    double t1 = 0;
    double t2 = 0;
};

// Intermediate symbols of the underdamped optimum.
struct underdamped_symbols {
    double alpha = 0;   // 4 q0 gamma - 3 omega^2 gamma m
    double beta = 0;    // omega (2 gamma^2 + 4 q0 m - omega^2 m^2)
    double denom = 0;   // 2 gamma beta - alpha omega m, must be > 0
    double r = 0;       // sqrt(alpha^2 + beta^2)
    double r2 = 0;      // sqrt((2q0/m - omega^2)^2 + (omega gamma / m)^2)
    double theta = 0;   // angle(2q0/m - omega^2 + i omega gamma / m)
};

inline underdamped_symbols underdamped_syms(engine_params const& p)
{
    if (!(p.m > 0)) {
        throw invalid_params("underdamped analytics require m > 0");
    }
    underdamped_symbols s;
    s.alpha = 4 * p.q0 * p.gamma - 3 * p.omega * p.omega * p.gamma * p.m;
    s.beta = p.omega *
             (2 * p.gamma * p.gamma + 4 * p.q0 * p.m - p.omega * p.omega * p.m * p.m);
    s.denom = 2 * p.gamma * s.beta - s.alpha * p.omega * p.m;
    s.r = std::hypot(s.alpha, s.beta);
    double a = 2 * p.q0 / p.m - p.omega * p.omega;
    double b = p.omega * p.gamma / p.m;
    s.r2 = std::hypot(a, b);
    s.theta = std::atan2(b, a);
    return s;
}

inline void require_valid_regime(underdamped_symbols const& s)
{
    if (!(s.denom > 0)) {
        throw invalid_regime(
            "underdamped perturbation formulas require 2*gamma*beta - alpha*omega*m > 0");
    }
}

// q1* = q0 g T1 / (2 gamma omega T0), phi* = angle(gamma omega - 2i q0),
// power = eps^2 k_B q0 T1^2 / (8 gamma T0), with g = sqrt(gamma^2 omega^2 + 4 q0^2).
inline optimal_control overdamped_optimum(engine_params const& p)
{
    require_valid(p);
    double g = std::hypot(p.gamma * p.omega, 2 * p.q0);
    optimal_control oc;
    oc.q1_star = p.q0 * g * p.T1 / (2 * p.gamma * p.omega * p.T0);
    oc.phi_star = wrap_angle(std::atan2(-2 * p.q0, p.gamma * p.omega));
    oc.power_leading =
        p.epsilon * p.epsilon * p.k_B * p.q0 * p.T1 * p.T1 / (8 * p.gamma * p.T0);
    return oc;
}

// First-order steady-state variance under the optimal overdamped control:
// Sigma(t) = k_B T0/q0 + eps k_B T1/(gamma omega) sin(omega t).
inline double overdamped_variance_first_order(engine_params const& p, double t)
{
    return p.k_B * p.T0 / p.q0 +
           p.epsilon * p.k_B * p.T1 / (p.gamma * p.omega) * std::sin(p.omega * t);
}

inline efficiency_report overdamped_efficiency(engine_params const& p)
{
    require_valid(p);
    constexpr double pi = std::numbers::pi;
    efficiency_report r;
    double base = p.epsilon * p.k_B * p.T1 * p.q0 / (p.gamma * p.omega);
    double corr = p.epsilon * pi * p.T1 / (8 * p.T0);
    r.Qh = base * (1 + corr);
    r.Qc = base * (1 - corr);
    r.W = r.Qh - r.Qc;
    r.t1 = pi / (2 * p.omega);
    r.t2 = 3 * pi / (2 * p.omega);
    if (r.Qh > 0) {
        r.eta = p.epsilon * (pi / 4) * p.T1 / p.T0;
    } else {
        r.eta = 0;
        r.degenerate = true;
    }
    return r;
}

// Ratio of the engine's efficiency at maximal power to the Carnot efficiency
// between T0 +/- eps*T1; tends to pi/8 as eps -> 0.
inline double carnot_comparison(engine_params const& p)
{
    if (!(p.T1 > 0)) {
        throw invalid_params("carnot comparison requires T1 > 0");
    }
    constexpr double pi = std::numbers::pi;
    double eta = p.epsilon * (pi / 4) * p.T1 / p.T0;
    double eta_carnot = 2 * p.epsilon * p.T1 / (p.T0 + p.epsilon * p.T1);
    return eta / eta_carnot;
}

// eps -> 0 limit of carnot_comparison by two-point Richardson extrapolation
// (the ratio is affine in eps, so the extrapolation is exact to round-off).
inline double carnot_comparison_limit(engine_params const& p, double eps = 1e-6)
{
    engine_params a = p;
    engine_params b = p;
    a.epsilon = eps;
    b.epsilon = 2 * eps;
    return 2 * carnot_comparison(a) - carnot_comparison(b);
}

inline optimal_control underdamped_optimum(engine_params const& p)
{
    require_valid(p);
    auto s = underdamped_syms(p);
    require_valid_regime(s);
    optimal_control oc;
    oc.q1_star = p.q0 * p.gamma * p.T1 * s.r / (p.T0 * s.denom);
    oc.phi_star = wrap_angle(std::atan2(-s.alpha, s.beta));
    oc.power_leading = p.epsilon * p.epsilon * p.q0 * p.omega * p.k_B * p.gamma *
                       p.gamma * p.T1 * p.T1 / (2 * p.T0 * s.denom);
    return oc;
}

struct covariance_first_order {
    double s11 = 0;
    double s12 = 0;
    double s22 = 0;
};

namespace detail_perturbation {

// First-harmonic phasors of the covariance entries at the optimal control,
// per unit epsilon: Sigma_ij(t) = Sigma_ij^(0) + eps Re[S_ij e^{i omega t}].
// S22 follows from the moment equations given S11 and the optimal gain;
// 2 q0/m - omega^2 + i omega gamma / m = r2 e^{i theta}.
struct covariance_phasors {
    std::complex<double> s11;
    std::complex<double> s12;
    std::complex<double> s22;
};

inline covariance_phasors optimal_covariance_phasors(engine_params const& p)
{
    auto s = underdamped_syms(p);
    require_valid_regime(s);
    auto oc = underdamped_optimum(p);
    using cd = std::complex<double>;
    covariance_phasors ph;
    ph.s11 = -(2 * p.gamma * p.k_B * p.T1 / s.denom) * cd(p.m * p.omega, 2 * p.gamma);
    ph.s12 = cd(0, p.omega / 2) * ph.s11;
    ph.s22 = 0.5 * s.r2 * std::exp(cd(0, s.theta)) * ph.s11 +
             (p.k_B * p.T0 * oc.q1_star / (p.m * p.q0)) *
                 std::exp(cd(0, -oc.phi_star));
    return ph;
}

}  // namespace detail_perturbation

// First-order covariance entries under the optimal underdamped control.
inline covariance_first_order underdamped_covariance_first_order(engine_params const& p,
                                                                 double t)
{
    auto ph = detail_perturbation::optimal_covariance_phasors(p);
    std::complex<double> e = std::exp(std::complex<double>(0, p.omega * t));
    covariance_first_order out;
    out.s11 = p.k_B * p.T0 / p.q0 + p.epsilon * (ph.s11 * e).real();
    out.s12 = p.epsilon * (ph.s12 * e).real();
    out.s22 = p.k_B * p.T0 / p.m + p.epsilon * (ph.s22 * e).real();
    return out;
}

inline efficiency_report underdamped_efficiency(engine_params const& p)
{
    require_valid(p);
    auto s = underdamped_syms(p);
    require_valid_regime(s);
    auto oc = underdamped_optimum(p);
    constexpr double pi = std::numbers::pi;
    efficiency_report r;
    r.kappa1 = 2 * p.m * p.gamma * s.r2 / s.r;
    r.kappa2 = 2 * p.m * p.gamma * p.q0 * p.omega / s.denom;
    // heat rate gamma (k_B T/m - Sigma22): first harmonic amplitude
    // eps gamma k_B T1 kappa / m, with kappa from the exact Sigma22 phasor.
    // As m -> 0, kappa/m -> sqrt(q0^2/gamma^2 + omega^2)/(2 gamma); the
    // omega^2 part is the kinetic energy tracking T(t), heat that has no
    // overdamped counterpart.
    if (p.T1 > 0) {
        auto ph = detail_perturbation::optimal_covariance_phasors(p);
        r.kappa = std::abs(1.0 - p.m * ph.s22 / (p.k_B * p.T1));
    }
    r.Qh = p.epsilon * 2 * r.kappa * p.gamma * p.k_B * p.T1 / (p.m * p.omega);
    double power = oc.power_leading;
    r.W = (2 * pi / p.omega) * power;
    r.Qc = r.Qh - r.W;
    if (r.Qh > 0) {
        r.eta = p.epsilon * pi * p.m * p.omega * p.q0 * p.gamma * p.T1 /
                (2 * r.kappa * p.T0 * s.denom);
    } else {
        r.eta = 0;
        r.degenerate = true;
    }
    return r;
}

}  // namespace sinebath

#endif  // SINEBATH_PERTURBATION_HPP

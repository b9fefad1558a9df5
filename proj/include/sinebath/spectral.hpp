#ifndef SINEBATH_SPECTRAL_HPP
#define SINEBATH_SPECTRAL_HPP

#include <complex>
#include <cstddef>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "sinebath/model.hpp"
#include "sinebath/moments.hpp"

namespace sinebath {

// Fourier harmonic-balance solution of the periodic Lyapunov equations.
// The single-harmonic control q(t) = q0 + eps q1 cos(omega t - phi) couples
// each covariance mode only to its neighbors, so the balance system is
// (block-)tridiagonal and solved by direct elimination.

using cplx = std::complex<double>;

struct spectral_solution {
    model_tag model = model_tag::overdamped;
    int modes = 0;  // truncation N; coefficients run n = -N..N
    double omega = 0;
    // control coefficients: a0 = q0, a1 = conj(a_minus1) = (eps q1/2) e^{-i phi}
    cplx a0, a1, am1;
    // Fourier coefficients indexed j = n + N; s12/s22 empty for overdamped
    std::vector<cplx> s11;
    std::vector<cplx> s12;
    std::vector<cplx> s22;
    double condition_estimate = 0;
    double tail_ratio = 0;       // |c_N| / |c_0|
    bool truncation_ok = true;   // tail_ratio <= 1e-12

    cplx coeff_s11(int n) const { return s11[static_cast<std::size_t>(n + modes)]; }
    cplx coeff_s12(int n) const { return s12[static_cast<std::size_t>(n + modes)]; }
    cplx coeff_s22(int n) const { return s22[static_cast<std::size_t>(n + modes)]; }
};

namespace detail {

inline void control_coeffs(control_profile const& c, cplx& a0, cplx& a1, cplx& am1)
{
    a0 = c.q0;
    a1 = 0.5 * c.epsilon * c.q1 * std::exp(cplx(0.0, -c.phi));
    am1 = std::conj(a1);
}

inline void check_conjugate_symmetry(std::vector<cplx> const& coeffs, int N,
                                     double scale)
{
    for (int n = 1; n <= N; ++n) {
        cplx diff = coeffs[static_cast<std::size_t>(N - n)] -
                    std::conj(coeffs[static_cast<std::size_t>(N + n)]);
        if (std::abs(diff) > 1e-10 * scale) {
            throw non_real_power("conjugate symmetry broken at mode " +
                                 std::to_string(n));
        }
    }
}

inline void finalize_tail(spectral_solution& sol)
{
    double c0 = std::abs(sol.s11[static_cast<std::size_t>(sol.modes)]);
    double tail = std::abs(sol.s11.front());
    if (!sol.s22.empty()) {
        tail = std::max({tail, std::abs(sol.s12.front()), std::abs(sol.s22.front())});
        tail = std::max({tail, std::abs(sol.s11.back()), std::abs(sol.s12.back()),
                         std::abs(sol.s22.back())});
    } else {
        tail = std::max(tail, std::abs(sol.s11.back()));
    }
    sol.tail_ratio = c0 > 0 ? tail / c0 : 0.0;
    sol.truncation_ok = sol.tail_ratio <= 1e-12;
}

}  // namespace detail

// Balance per mode n in -N..N:
//   i omega n c_n = -(2/gamma) (a0 c_n + a1 c_{n-1} + a_{-1} c_{n+1})
//                   + (2/gamma) k_B T_n,
// with T_n nonzero only for n in {-1, 0, 1}. Coefficients outside the
// truncation are zero. Scalar tridiagonal Thomas elimination.
inline spectral_solution solve_overdamped_spectral(engine_params const& p,
                                                   control_profile const& c, int N)
{
    require_valid(p);
    if (N < 2) {
        throw invalid_params("spectral truncation requires N >= 2");
    }
    int const M = 2 * N + 1;
    spectral_solution sol;
    sol.model = model_tag::overdamped;
    sol.modes = N;
    sol.omega = p.omega;
    detail::control_coeffs(c, sol.a0, sol.a1, sol.am1);

    double const two_over_gamma = 2.0 / p.gamma;
    std::vector<cplx> diag(M), sub(M), sup(M), rhs(M);
    for (int j = 0; j < M; ++j) {
        int n = j - N;
        diag[j] = cplx(0.0, p.omega * n) + two_over_gamma * sol.a0;
        sub[j] = two_over_gamma * sol.a1;    // multiplies c_{n-1}
        sup[j] = two_over_gamma * sol.am1;   // multiplies c_{n+1}
        rhs[j] = 0;
        if (n == 0) {
            rhs[j] = two_over_gamma * p.k_B * p.T0;
        } else if (n == 1 || n == -1) {
            rhs[j] = two_over_gamma * p.k_B * p.epsilon * p.T1 / 2.0;
        }
    }

    // Thomas elimination with pivot-magnitude condition tracking
    double max_pivot = 0;
    double min_pivot = 1e300;
    for (int j = 1; j < M; ++j) {
        double piv = std::abs(diag[j - 1]);
        max_pivot = std::max(max_pivot, piv);
        min_pivot = std::min(min_pivot, piv);
        if (piv == 0.0) {
            throw singular_system("zero pivot in spectral balance at mode " +
                                  std::to_string(j - 1 - N));
        }
        cplx w = sub[j] / diag[j - 1];
        diag[j] -= w * sup[j - 1];
        rhs[j] -= w * rhs[j - 1];
    }
    double last = std::abs(diag[M - 1]);
    max_pivot = std::max(max_pivot, last);
    min_pivot = std::min(min_pivot, last);
    sol.condition_estimate = min_pivot > 0 ? max_pivot / min_pivot : 1e300;
    if (min_pivot <= 1e-14 * max_pivot) {
        throw singular_system("spectral balance numerically singular; "
                              "condition estimate " +
                              std::to_string(sol.condition_estimate));
    }

    sol.s11.resize(M);
    sol.s11[M - 1] = rhs[M - 1] / diag[M - 1];
    for (int j = M - 2; j >= 0; --j) {
        sol.s11[j] = (rhs[j] - sup[j] * sol.s11[j + 1]) / diag[j];
    }

    double scale = std::abs(sol.s11[static_cast<std::size_t>(N)]);
    detail::check_conjugate_symmetry(sol.s11, N, std::max(scale, 1e-300));
    detail::finalize_tail(sol);
    return sol;
}

// Vectorized 3-component balance for the underdamped model. Per mode n the
// 3x3 block (i omega n I - L0) couples to neighbors through a1, a_{-1} times
// dL/dq; solved as a block-tridiagonal system.
inline spectral_solution solve_underdamped_spectral(engine_params const& p,
                                                    control_profile const& c, int N)
{
    require_valid(p);
    if (!(p.m > 0)) {
        throw invalid_params("underdamped spectral solve requires m > 0");
    }
    if (N < 2) {
        throw invalid_params("spectral truncation requires N >= 2");
    }
    using Mat3 = Eigen::Matrix3cd;
    using Vec3 = Eigen::Vector3cd;

    int const M = 2 * N + 1;
    spectral_solution sol;
    sol.model = model_tag::underdamped;
    sol.modes = N;
    sol.omega = p.omega;
    detail::control_coeffs(c, sol.a0, sol.a1, sol.am1);

    double const im = 1.0 / p.m;
    Mat3 L0;  // homogeneous generator at the nominal gain
    L0 << 0, 2, 0,
        -sol.a0 * im, -p.gamma * im, 1,
        0, -2.0 * sol.a0 * im, -2 * p.gamma * im;
    Mat3 Lq;  // derivative of the generator with respect to q
    Lq << 0, 0, 0,
        -im, 0, 0,
        0, -2 * im, 0;

    std::vector<Mat3> diag(M);
    std::vector<Vec3> rhs(M, Vec3::Zero());
    Mat3 sub = -sol.a1 * Lq;   // multiplies y_{n-1}
    Mat3 sup = -sol.am1 * Lq;  // multiplies y_{n+1}
    for (int j = 0; j < M; ++j) {
        int n = j - N;
        diag[j] = cplx(0.0, p.omega * n) * Mat3::Identity() - L0;
        double Tn = 0;
        if (n == 0) {
            Tn = p.T0;
        } else if (n == 1 || n == -1) {
            Tn = p.epsilon * p.T1 / 2.0;
        }
        rhs[j](2) = 2 * p.gamma * p.k_B * Tn * im * im;
    }

    // block Thomas elimination
    double worst_cond = 0;
    for (int j = 1; j < M; ++j) {
        Eigen::PartialPivLU<Mat3> lu(diag[j - 1]);
        double dn = diag[j - 1].norm();
        Mat3 inv = lu.inverse();
        worst_cond = std::max(worst_cond, dn * inv.norm());
        if (!inv.allFinite() || dn * inv.norm() > 1e14) {
            throw singular_system("block spectral balance numerically singular; "
                                  "condition estimate " + std::to_string(worst_cond));
        }
        Mat3 w = sub * inv;
        diag[j] -= w * sup;
        rhs[j] -= w * rhs[j - 1];
    }
    {
        Eigen::PartialPivLU<Mat3> lu(diag[M - 1]);
        Mat3 inv = lu.inverse();
        worst_cond = std::max(worst_cond, diag[M - 1].norm() * inv.norm());
        if (!inv.allFinite() || worst_cond > 1e14) {
            throw singular_system("block spectral balance numerically singular; "
                                  "condition estimate " + std::to_string(worst_cond));
        }
    }
    sol.condition_estimate = worst_cond;

    std::vector<Vec3> y(M);
    y[M - 1] = diag[M - 1].partialPivLu().solve(rhs[M - 1]);
    for (int j = M - 2; j >= 0; --j) {
        y[j] = diag[j].partialPivLu().solve(Vec3(rhs[j] - sup * y[j + 1]));
    }

    sol.s11.resize(M);
    sol.s12.resize(M);
    sol.s22.resize(M);
    for (int j = 0; j < M; ++j) {
        sol.s11[j] = y[j](0);
        sol.s12[j] = y[j](1);
        sol.s22[j] = y[j](2);
    }
    double scale = std::max(
        {std::abs(sol.s11[static_cast<std::size_t>(N)]),
         std::abs(sol.s22[static_cast<std::size_t>(N)]), 1e-300});
    detail::check_conjugate_symmetry(sol.s11, N, scale);
    detail::check_conjugate_symmetry(sol.s12, N, scale);
    detail::check_conjugate_symmetry(sol.s22, N, scale);
    detail::finalize_tail(sol);
    return sol;
}

inline spectral_solution solve_spectral(engine_params const& p,
                                        control_profile const& c, int N)
{
    return p.overdamped() ? solve_overdamped_spectral(p, c, N)
                          : solve_underdamped_spectral(p, c, N);
}

// power = -(i omega / 2) (a1 c_{-1} - a_{-1} c_1), with c the Fourier
// coefficients of Sigma (overdamped) or Sigma11 (underdamped). The imaginary
// part must vanish to round-off and is asserted.
inline double spectral_power(spectral_solution const& sol)
{
    cplx cm1 = sol.coeff_s11(-1);
    cplx cp1 = sol.coeff_s11(1);
    cplx pw = -cplx(0.0, sol.omega / 2) * (sol.a1 * cm1 - sol.am1 * cp1);
    double scale = std::max({std::abs(pw.real()),
                             sol.omega * std::abs(sol.a1) * std::abs(cp1), 1e-300});
    if (std::abs(pw.imag()) > 1e-12 * scale) {
        throw non_real_power("spectral power has non-vanishing imaginary part " +
                             std::to_string(pw.imag()));
    }
    return pw.real();
}

// Real-signal evaluation of the truncated Fourier series at time t.
inline double reconstruct_component(std::vector<cplx> const& coeffs, int N,
                                    double omega, double t)
{
    double val = coeffs[static_cast<std::size_t>(N)].real();
    for (int n = 1; n <= N; ++n) {
        cplx cn = coeffs[static_cast<std::size_t>(N + n)];
        val += 2 * (cn * std::exp(cplx(0.0, n * omega * t))).real();
    }
    return val;
}

// Sample the spectral solution on a uniform one-period grid, producing a
// trajectory interchangeable with the time-domain integrator's output.
inline covariance_trajectory reconstruct_trajectory(spectral_solution const& sol,
                                                    int steps)
{
    covariance_trajectory traj;
    traj.model = sol.model;
    double period = 2 * std::numbers::pi / sol.omega;
    double dt = period / steps;
    traj.t.reserve(steps + 1);
    traj.cov.reserve(steps + 1);
    for (int i = 0; i <= steps; ++i) {
        double t = i * dt;
        cov_state s;
        s.s11 = reconstruct_component(sol.s11, sol.modes, sol.omega, t);
        if (sol.model == model_tag::underdamped) {
            s.s12 = reconstruct_component(sol.s12, sol.modes, sol.omega, t);
            s.s22 = reconstruct_component(sol.s22, sol.modes, sol.omega, t);
        }
        traj.t.push_back(t);
        traj.cov.push_back(s);
    }
    return traj;
}

// CSV: one row per mode and component, with metadata header.
inline void write_spectral_csv(std::ostream& os, engine_params const& p,
                               control_profile const& c,
                               spectral_solution const& sol)
{
    os << "# model=" << to_string(sol.model) << " modes=" << sol.modes
       << " m=" << p.m << " gamma=" << p.gamma << " k_B=" << p.k_B
       << " omega=" << p.omega << " T0=" << p.T0 << " T1=" << p.T1
       << " q0=" << c.q0 << " q1=" << c.q1 << " phi=" << c.phi
       << " epsilon=" << p.epsilon << "\n";
    os << "# condition_estimate=" << sol.condition_estimate
       << " tail_ratio=" << sol.tail_ratio << "\n";
    os << "component,n,re,im\n";
    auto dump = [&](char const* name, std::vector<cplx> const& v) {
        for (int n = -sol.modes; n <= sol.modes; ++n) {
            cplx cn = v[static_cast<std::size_t>(n + sol.modes)];
            os << name << "," << n << "," << cn.real() << "," << cn.imag() << "\n";
        }
    };
    if (sol.model == model_tag::overdamped) {
        dump("Sigma", sol.s11);
    } else {
        dump("S11", sol.s11);
        dump("S12", sol.s12);
        dump("S22", sol.s22);
    }
}

}  // namespace sinebath

#endif  // SINEBATH_SPECTRAL_HPP

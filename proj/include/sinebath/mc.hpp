#ifndef SINEBATH_MC_HPP
#define SINEBATH_MC_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <thread>
#include <vector>

#include "sinebath/model.hpp"

namespace sinebath {

// Monte Carlo validation layer: Euler-Maruyama ensembles of the Langevin
// SDEs with per-trajectory stochastic work/heat accounting. Trajectory RNG
// streams are counter-based (Philox4x32-10 keyed by seed and trajectory
// index), so results are bit-identical for any thread count.

namespace rng {

// Philox4x32-10 counter-based generator (Salmon et al. round function).
struct philox4x32 {
    std::uint32_t key0, key1;

    static constexpr std::uint32_t M0 = 0xD2511F53u;
    static constexpr std::uint32_t M1 = 0xCD9E8D57u;
    static constexpr std::uint32_t W0 = 0x9E3779B9u;
    static constexpr std::uint32_t W1 = 0xBB67AE85u;

    struct block {
        std::uint32_t v[4];
    };

    block operator()(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                     std::uint32_t c3) const
    {
        std::uint32_t k0 = key0;
        std::uint32_t k1 = key1;
        for (int round = 0; round < 10; ++round) {
            std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c0;
            std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c2;
            std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            std::uint32_t n0 = hi1 ^ c1 ^ k0;
            std::uint32_t n1 = lo1;
            std::uint32_t n2 = hi0 ^ c3 ^ k1;
            std::uint32_t n3 = lo0;
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
            k0 += W0;
            k1 += W1;
        }
        return block{{c0, c1, c2, c3}};
    }
};

// Stream of standard normal draws for one trajectory: counter words are
// (trajectory, block, 0, 0); each block yields four normals via Box-Muller.
class normal_stream {
public:
    normal_stream(std::uint64_t seed, std::uint64_t traj)
        : gen_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)},
          traj_lo_(static_cast<std::uint32_t>(traj)),
          traj_hi_(static_cast<std::uint32_t>(traj >> 32))
    {
    }

    double next()
    {
        if (have_ == 0) {
            refill();
        }
        return cache_[--have_];
    }

private:
    void refill()
    {
        auto b = gen_(traj_lo_, traj_hi_, static_cast<std::uint32_t>(block_),
                      static_cast<std::uint32_t>(block_ >> 32));
        ++block_;
        for (int i = 0; i < 2; ++i) {
            // uniforms in (0, 1]; log of the first is finite
            double u1 = (b.v[2 * i] + 1.0) * 0x1p-32;
            double u2 = b.v[2 * i + 1] * 0x1p-32;
            double r = std::sqrt(-2.0 * std::log(u1));
            double th = 2 * std::numbers::pi * u2;
            cache_[2 * i] = r * std::cos(th);
            cache_[2 * i + 1] = r * std::sin(th);
        }
        have_ = 4;
    }

    philox4x32 gen_;
    std::uint32_t traj_lo_, traj_hi_;
    std::uint64_t block_ = 0;
    double cache_[4] = {};
    int have_ = 0;
};

}  // namespace rng

struct mc_config {
    long n_traj = 100000;
    int steps_per_period = 10000;  // dt = period / steps_per_period
    int n_periods = 1;             // measurement window, whole periods
    int burn_in_periods = 20;
    int n_samples = 100;           // per-period sample count for moment records
    std::uint64_t seed = 0;
    double overflow_guard = 1e6;   // |X| (or |v|) beyond this aborts the run
};

struct mc_sample_stats {
    double t = 0;
    double mean_x = 0, var_x = 0, se_var_x = 0;
    double mean_v = 0, var_v = 0, se_var_v = 0;  // underdamped only
    double cov_xv = 0;
};

struct mc_ensemble_stats {
    model_tag model = model_tag::overdamped;
    mc_config config;
    double dt = 0;
    std::vector<mc_sample_stats> samples;  // n_samples points over the window
    double mean_W = 0;            // ensemble mean work done on the particle
    double mean_Q = 0;            // ensemble mean heat
    double mean_dE = 0;           // ensemble mean internal-energy change
    double mean_abs_residual = 0; // mean |dE - (Q + W)| per trajectory
    double max_abs_residual = 0;
};

struct first_law_summary {
    double mean_abs_residual = 0;
    double max_abs_residual = 0;
    double mean_residual = 0;
};

namespace detail_mc {

struct chunk_accum {
    std::vector<double> sum_x, sum_x2, sum_x4;
    std::vector<double> sum_v, sum_v2, sum_v4, sum_xv;
    double sum_W = 0, sum_Q = 0, sum_dE = 0;
    double sum_abs_res = 0, max_abs_res = 0, sum_res = 0;
    bool unstable = false;
    double unstable_t = 0;

    explicit chunk_accum(std::size_t ns)
        : sum_x(ns, 0), sum_x2(ns, 0), sum_x4(ns, 0), sum_v(ns, 0), sum_v2(ns, 0),
          sum_v4(ns, 0), sum_xv(ns, 0)
    {
    }
};

// Deterministic parallel map over trajectory chunks; chunks are combined in
// index order regardless of which thread produced them.
template <typename Body>
inline std::vector<chunk_accum> run_chunks(mc_config const& cfg, std::size_t ns,
                                           Body const& body)
{
    long const chunk_size = 256;
    long const n_chunks = (cfg.n_traj + chunk_size - 1) / chunk_size;
    std::vector<chunk_accum> chunks(static_cast<std::size_t>(n_chunks),
                                    chunk_accum(ns));
    unsigned hw = std::thread::hardware_concurrency();
    unsigned n_threads = hw ? hw : 4;
    if (static_cast<long>(n_threads) > n_chunks) {
        n_threads = static_cast<unsigned>(n_chunks);
    }
    std::vector<std::thread> pool;
    std::atomic<long> next{0};
    for (unsigned th = 0; th < n_threads; ++th) {
        pool.emplace_back([&]() {
            for (;;) {
                long ci = next.fetch_add(1);
                if (ci >= n_chunks) {
                    return;
                }
                long lo = ci * chunk_size;
                long hi = std::min(lo + chunk_size, cfg.n_traj);
                for (long traj = lo; traj < hi; ++traj) {
                    body(traj, chunks[static_cast<std::size_t>(ci)]);
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    return chunks;
}

inline mc_ensemble_stats reduce(model_tag model, engine_params const& p,
                                mc_config const& cfg, double dt,
                                std::vector<double> const& sample_times,
                                std::vector<chunk_accum> const& chunks)
{
    std::size_t ns = sample_times.size();
    chunk_accum total(ns);
    for (auto const& ch : chunks) {
        if (ch.unstable) {
            throw mc_unstable("trajectory exceeded the overflow guard near t = " +
                              std::to_string(ch.unstable_t) +
                              "; control likely destabilizing");
        }
        for (std::size_t i = 0; i < ns; ++i) {
            total.sum_x[i] += ch.sum_x[i];
            total.sum_x2[i] += ch.sum_x2[i];
            total.sum_x4[i] += ch.sum_x4[i];
            total.sum_v[i] += ch.sum_v[i];
            total.sum_v2[i] += ch.sum_v2[i];
            total.sum_v4[i] += ch.sum_v4[i];
            total.sum_xv[i] += ch.sum_xv[i];
        }
        total.sum_W += ch.sum_W;
        total.sum_Q += ch.sum_Q;
        total.sum_dE += ch.sum_dE;
        total.sum_abs_res += ch.sum_abs_res;
        total.sum_res += ch.sum_res;
        total.max_abs_res = std::max(total.max_abs_res, ch.max_abs_res);
    }
    double n = static_cast<double>(cfg.n_traj);
    mc_ensemble_stats out;
    out.model = model;
    out.config = cfg;
    out.dt = dt;
    out.samples.resize(ns);
    for (std::size_t i = 0; i < ns; ++i) {
        auto& s = out.samples[i];
        s.t = sample_times[i];
        s.mean_x = total.sum_x[i] / n;
        double ex2 = total.sum_x2[i] / n;
        double ex4 = total.sum_x4[i] / n;
        s.var_x = ex2 - s.mean_x * s.mean_x;
        // standard error of the sample variance from the fourth moment
        double var_of_x2 = std::max(ex4 - ex2 * ex2, 0.0);
        s.se_var_x = std::sqrt(var_of_x2 / n);
        if (model == model_tag::underdamped) {
            s.mean_v = total.sum_v[i] / n;
            double ev2 = total.sum_v2[i] / n;
            double ev4 = total.sum_v4[i] / n;
            s.var_v = ev2 - s.mean_v * s.mean_v;
            s.se_var_v = std::sqrt(std::max(ev4 - ev2 * ev2, 0.0) / n);
            s.cov_xv = total.sum_xv[i] / n - s.mean_x * s.mean_v;
        }
    }
    out.mean_W = total.sum_W / n;
    out.mean_Q = total.sum_Q / n;
    out.mean_dE = total.sum_dE / n;
    out.mean_abs_residual = total.sum_abs_res / n;
    out.max_abs_residual = total.max_abs_res;
    (void)p;
    return out;
}

}  // namespace detail_mc

// Overdamped Euler-Maruyama:
//   dX = -(q(t)/gamma) X dt + sqrt(2 k_B T(t)/gamma) dB.
// Work increment: dW = 1/2 qdot(t) X^2 dt (done on the particle).
// Heat via the Stratonovich midpoint rule:
//   dQ = q(t + dt/2) * (X_t + X_{t+dt})/2 * (X_{t+dt} - X_t).
// Initial states are drawn from the static-bath Gaussian.
inline mc_ensemble_stats simulate_overdamped(engine_params const& p,
                                             control_profile const& c,
                                             mc_config const& cfg)
{
    require_valid(p);
    if (!p.overdamped()) {
        throw model_mismatch("simulate_overdamped requires m = 0");
    }
    double const period = p.period();
    double const dt = period / cfg.steps_per_period;
    long const burn_steps =
        static_cast<long>(cfg.burn_in_periods) * cfg.steps_per_period;
    long const meas_steps = static_cast<long>(cfg.n_periods) * cfg.steps_per_period;
    int const sample_stride = cfg.steps_per_period / cfg.n_samples;
    std::vector<double> sample_times;
    std::vector<long> sample_steps;
    for (long i = 0; i * sample_stride < meas_steps; ++i) {
        sample_steps.push_back(i * sample_stride);
        sample_times.push_back(i * sample_stride * dt);
    }
    double const x0_sd = std::sqrt(p.k_B * p.T0 / p.q0);

    auto body = [&](long traj, detail_mc::chunk_accum& acc) {
        if (acc.unstable) {
            return;
        }
        rng::normal_stream rnd(cfg.seed, static_cast<std::uint64_t>(traj));
        double x = x0_sd * rnd.next();
        // burn-in
        for (long k = 0; k < burn_steps; ++k) {
            double t = static_cast<double>(k % cfg.steps_per_period) * dt;
            double drift = -control_at(c, p.omega, t) / p.gamma * x;
            double amp = std::sqrt(2 * p.k_B * temperature_at(p, t) / p.gamma * dt);
            x += drift * dt + amp * rnd.next();
            if (std::abs(x) > cfg.overflow_guard) {
                acc.unstable = true;
                acc.unstable_t = t;
                return;
            }
        }
        // measurement window
        double W = 0, Q = 0;
        double q_start = control_at(c, p.omega, 0.0);
        double E0 = 0.5 * q_start * x * x;
        std::size_t si = 0;
        for (long k = 0; k < meas_steps; ++k) {
            double t = static_cast<double>(k % cfg.steps_per_period) * dt;
            if (si < sample_steps.size() && k == sample_steps[si]) {
                acc.sum_x[si] += x;
                acc.sum_x2[si] += x * x;
                acc.sum_x4[si] += x * x * x * x;
                ++si;
            }
            double q_t = control_at(c, p.omega, t);
            double drift = -q_t / p.gamma * x;
            double amp = std::sqrt(2 * p.k_B * temperature_at(p, t) / p.gamma * dt);
            double x_new = x + drift * dt + amp * rnd.next();
            W += 0.5 * control_rate_at(c, p.omega, t) * x * x * dt;
            double q_mid = control_at(c, p.omega, t + dt / 2);
            Q += q_mid * 0.5 * (x + x_new) * (x_new - x);
            x = x_new;
            if (std::abs(x) > cfg.overflow_guard) {
                acc.unstable = true;
                acc.unstable_t = t;
                return;
            }
        }
        double q_end = control_at(c, p.omega, meas_steps * dt);
        double dE = 0.5 * q_end * x * x - E0;
        double res = dE - (Q + W);
        acc.sum_W += W;
        acc.sum_Q += Q;
        acc.sum_dE += dE;
        acc.sum_res += res;
        acc.sum_abs_res += std::abs(res);
        acc.max_abs_res = std::max(acc.max_abs_res, std::abs(res));
    };

    auto chunks = detail_mc::run_chunks(cfg, sample_times.size(), body);
    return detail_mc::reduce(model_tag::overdamped, p, cfg, dt, sample_times, chunks);
}

// Underdamped Euler-Maruyama on (X, v):
//   dX = v dt,  m dv = -q(t) X dt - gamma v dt + sqrt(2 gamma k_B T(t)) dB.
// Heat via the Ito form, sharing the velocity noise increment:
//   dQ = (-gamma v^2 + gamma k_B T(t)/m) dt + sqrt(2 gamma k_B T(t)) v dB,
// whose mean rate is gamma (k_B T/m - E[v^2]).
inline mc_ensemble_stats simulate_underdamped(engine_params const& p,
                                              control_profile const& c,
                                              mc_config const& cfg)
{
    require_valid(p);
    if (p.overdamped()) {
        throw model_mismatch("simulate_underdamped requires m > 0");
    }
    double const period = p.period();
    double const dt = period / cfg.steps_per_period;
    long const burn_steps =
        static_cast<long>(cfg.burn_in_periods) * cfg.steps_per_period;
    long const meas_steps = static_cast<long>(cfg.n_periods) * cfg.steps_per_period;
    int const sample_stride = cfg.steps_per_period / cfg.n_samples;
    std::vector<double> sample_times;
    std::vector<long> sample_steps;
    for (long i = 0; i * sample_stride < meas_steps; ++i) {
        sample_steps.push_back(i * sample_stride);
        sample_times.push_back(i * sample_stride * dt);
    }
    double const x0_sd = std::sqrt(p.k_B * p.T0 / p.q0);
    double const v0_sd = std::sqrt(p.k_B * p.T0 / p.m);

    auto body = [&](long traj, detail_mc::chunk_accum& acc) {
        if (acc.unstable) {
            return;
        }
        rng::normal_stream rnd(cfg.seed, static_cast<std::uint64_t>(traj));
        double x = x0_sd * rnd.next();
        double v = v0_sd * rnd.next();
        auto step = [&](double t, double* dQ) {
            double q_t = control_at(c, p.omega, t);
            double amp = std::sqrt(2 * p.gamma * p.k_B * temperature_at(p, t));
            double dB = std::sqrt(dt) * rnd.next();
            double dv = (-q_t * x - p.gamma * v) / p.m * dt + amp / p.m * dB;
            if (dQ) {
                *dQ = (-p.gamma * v * v + p.gamma * p.k_B * temperature_at(p, t) / p.m) *
                          dt +
                      amp * v * dB;
            }
            x += v * dt;
            v += dv;
        };
        for (long k = 0; k < burn_steps; ++k) {
            double t = static_cast<double>(k % cfg.steps_per_period) * dt;
            step(t, nullptr);
            if (std::abs(x) > cfg.overflow_guard || std::abs(v) > cfg.overflow_guard) {
                acc.unstable = true;
                acc.unstable_t = t;
                return;
            }
        }
        double W = 0, Q = 0;
        double E0 = 0.5 * p.m * v * v + 0.5 * control_at(c, p.omega, 0.0) * x * x;
        std::size_t si = 0;
        for (long k = 0; k < meas_steps; ++k) {
            double t = static_cast<double>(k % cfg.steps_per_period) * dt;
            if (si < sample_steps.size() && k == sample_steps[si]) {
                acc.sum_x[si] += x;
                acc.sum_x2[si] += x * x;
                acc.sum_x4[si] += x * x * x * x;
                acc.sum_v[si] += v;
                acc.sum_v2[si] += v * v;
                acc.sum_v4[si] += v * v * v * v;
                acc.sum_xv[si] += x * v;
                ++si;
            }
            W += 0.5 * control_rate_at(c, p.omega, t) * x * x * dt;
            double dQ = 0;
            step(t, &dQ);
            Q += dQ;
            if (std::abs(x) > cfg.overflow_guard || std::abs(v) > cfg.overflow_guard) {
                acc.unstable = true;
                acc.unstable_t = t;
                return;
            }
        }
        double q_end = control_at(c, p.omega, meas_steps * dt);
        double dE = 0.5 * p.m * v * v + 0.5 * q_end * x * x - E0;
        double res = dE - (Q + W);
        acc.sum_W += W;
        acc.sum_Q += Q;
        acc.sum_dE += dE;
        acc.sum_res += res;
        acc.sum_abs_res += std::abs(res);
        acc.max_abs_res = std::max(acc.max_abs_res, std::abs(res));
    };

    auto chunks = detail_mc::run_chunks(cfg, sample_times.size(), body);
    return detail_mc::reduce(model_tag::underdamped, p, cfg, dt, sample_times, chunks);
}

inline first_law_summary first_law_audit(mc_ensemble_stats const& stats)
{
    first_law_summary s;
    s.mean_abs_residual = stats.mean_abs_residual;
    s.max_abs_residual = stats.max_abs_residual;
    s.mean_residual = stats.mean_dE - (stats.mean_Q + stats.mean_W);
    return s;
}

// Fitted convergence slope between two runs at dt and dt/2 (expect ~1).
inline double first_law_convergence_slope(mc_ensemble_stats const& coarse,
                                          mc_ensemble_stats const& fine)
{
    return std::log2(coarse.mean_abs_residual / fine.mean_abs_residual) /
           std::log2(coarse.dt / fine.dt);
}

inline void write_mc_csv(std::ostream& os, engine_params const& p,
                         control_profile const& c, mc_ensemble_stats const& st)
{
    os << "# model=" << to_string(st.model) << " m=" << p.m << " gamma=" << p.gamma
       << " k_B=" << p.k_B << " omega=" << p.omega << " T0=" << p.T0
       << " T1=" << p.T1 << " q0=" << c.q0 << " q1=" << c.q1 << " phi=" << c.phi
       << " epsilon=" << p.epsilon << "\n";
    os << "# n_traj=" << st.config.n_traj
       << " steps_per_period=" << st.config.steps_per_period
       << " n_periods=" << st.config.n_periods
       << " burn_in_periods=" << st.config.burn_in_periods
       << " seed=" << st.config.seed << " dt=" << st.dt << "\n";
    os << "# mean_W=" << st.mean_W << " mean_Q=" << st.mean_Q
       << " mean_dE=" << st.mean_dE
       << " mean_abs_first_law_residual=" << st.mean_abs_residual << "\n";
    if (st.model == model_tag::overdamped) {
        os << "t,mean_x,var_x,se_var_x\n";
        for (auto const& s : st.samples) {
            os << s.t << "," << s.mean_x << "," << s.var_x << "," << s.se_var_x
               << "\n";
        }
    } else {
        os << "t,mean_x,var_x,se_var_x,mean_v,var_v,se_var_v,cov_xv\n";
        for (auto const& s : st.samples) {
            os << s.t << "," << s.mean_x << "," << s.var_x << "," << s.se_var_x
               << "," << s.mean_v << "," << s.var_v << "," << s.se_var_v << ","
               << s.cov_xv << "\n";
        }
    }
}

}  // namespace sinebath

#endif  // SINEBATH_MC_HPP

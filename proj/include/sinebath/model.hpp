#ifndef SINEBATH_MODEL_HPP
#define SINEBATH_MODEL_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sinebath {

// ---------------------------------------------------------------------------
// Error types
// ---------------------------------------------------------------------------

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct invalid_params : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct no_convergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct step_too_coarse : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct singular_system : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct non_real_power : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct invalid_regime : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct model_mismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct period_mismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct mc_unstable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class model_tag { overdamped, underdamped };

inline std::string to_string(model_tag m)
{
    return m == model_tag::overdamped ? "overdamped" : "underdamped";
}

// Wrap an angle into (-pi, pi].
inline double wrap_angle(double phi)
{
    constexpr double pi = std::numbers::pi;
    double w = std::remainder(phi, 2 * pi);
    if (w <= -pi) {
        w += 2 * pi;
    }
    return w;
}

// ---------------------------------------------------------------------------
// EngineParams: physical constants of the engine.
//
// m = 0 is legal and selects the overdamped model everywhere; operations
// that require inertia reject it.
// ---------------------------------------------------------------------------

struct engine_params {
    double m = 0;        // mass; 0 denotes the overdamped model
    double gamma = 1;    // viscosity, > 0
    double k_B = 1;      // Boltzmann constant, > 0 (natural units default)
    double omega = 1;    // drive frequency, > 0
    double T0 = 1;       // mean bath temperature, > 0
    double T1 = 0;       // temperature amplitude, >= 0
    double q0 = 1;       // nominal control gain, > 0
    double epsilon = 0;  // perturbation strength, >= 0

    double period() const { return 2 * std::numbers::pi / omega; }
    bool overdamped() const { return m == 0.0; }
};

// Returns a description of every violated invariant; empty means valid.
inline std::vector<std::string> validate(engine_params const& p)
{
    std::vector<std::string> errs;
    if (!(p.m >= 0) || !std::isfinite(p.m)) {
        errs.push_back("mass must be finite and >= 0 (0 selects overdamped)");
    }
    if (!(p.gamma > 0) || !std::isfinite(p.gamma)) {
        errs.push_back("viscosity gamma must be positive");
    }
    if (!(p.k_B > 0)) {
        errs.push_back("k_B must be positive");
    }
    if (!(p.omega > 0) || !std::isfinite(p.omega)) {
        errs.push_back("frequency omega must be positive");
    }
    if (!(p.T0 > 0)) {
        errs.push_back("mean temperature T0 must be positive");
    }
    if (!(p.T1 >= 0)) {
        errs.push_back("temperature amplitude T1 must be >= 0");
    }
    if (!(p.epsilon >= 0)) {
        errs.push_back("perturbation epsilon must be >= 0");
    }
    if (p.T1 >= 0 && p.epsilon >= 0 && !(p.T0 > p.epsilon * p.T1)) {
        errs.push_back("temperature non-positive: requires T0 > epsilon*T1");
    }
    if (!(p.q0 > 0)) {
        errs.push_back("nominal gain q0 must be positive");
    }
    return errs;
}

inline void require_valid(engine_params const& p)
{
    auto errs = validate(p);
    if (!errs.empty()) {
        std::string msg = "invalid engine parameters:";
        for (auto const& e : errs) {
            msg += " [" + e + "]";
        }
        throw invalid_params(msg);
    }
}

// T(t) = T0 + eps*T1*cos(omega t), strictly positive for valid params.
inline double temperature_at(engine_params const& p, double t)
{
    return p.T0 + p.epsilon * p.T1 * std::cos(p.omega * t);
}

// ---------------------------------------------------------------------------
// ControlProfile: q(t) = q0 + eps*q1*cos(omega t - phi).
//
// The cos(omega t - phi) sign convention is fixed project-wide.
// ---------------------------------------------------------------------------

struct control_profile {
    double q0 = 1;       // nominal gain
    double q1 = 0;       // harmonic amplitude, >= 0
    double phi = 0;      // phase in (-pi, pi]
    double epsilon = 0;  // perturbation strength

    static control_profile make(double q0, double q1, double phi, double epsilon)
    {
        if (!(q0 > 0)) {
            throw invalid_params("control profile: q0 must be positive");
        }
        if (!(q1 >= 0)) {
            throw invalid_params("control profile: q1 must be >= 0");
        }
        return control_profile{q0, q1, wrap_angle(phi), epsilon};
    }
};

inline double control_at(control_profile const& c, double omega, double t)
{
    return c.q0 + c.epsilon * c.q1 * std::cos(omega * t - c.phi);
}

// Exact analytic derivative of control_at.
inline double control_rate_at(control_profile const& c, double omega, double t)
{
    return -c.epsilon * c.q1 * omega * std::sin(omega * t - c.phi);
}

// Static control at the nominal gain (u == 0).
inline control_profile nominal_control(engine_params const& p)
{
    return control_profile{p.q0, 0.0, 0.0, p.epsilon};
}

// ---------------------------------------------------------------------------
// Configuration file: flat "key = value" lines, '#' comments.
// Keys: m, gamma, k_B, omega, T0, T1, q0, epsilon, q1, phi.
// Missing keys take the defaults; unknown keys are an error.
// ---------------------------------------------------------------------------

struct model_config {
    engine_params params;
    control_profile control;
};

inline model_config parse_config_text(std::string const& text)
{
    engine_params p;
    double q1 = 0;
    double phi = 0;
    std::map<std::string, double*> keys = {
        {"m", &p.m},     {"gamma", &p.gamma}, {"k_B", &p.k_B},
        {"omega", &p.omega}, {"T0", &p.T0},   {"T1", &p.T1},
        {"q0", &p.q0},   {"epsilon", &p.epsilon}, {"q1", &q1},
        {"phi", &phi},
    };
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
        auto begin = std::find_if(line.begin(), line.end(), not_space);
        if (begin == line.end()) {
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw config_error("config line " + std::to_string(lineno) +
                               ": expected 'key = value'");
        }
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        auto it = keys.find(key);
        if (it == keys.end()) {
            throw config_error("config line " + std::to_string(lineno) +
                               ": unknown key '" + key + "'");
        }
        try {
            std::size_t pos = 0;
            double v = std::stod(val, &pos);
            if (pos != val.size()) {
                throw std::invalid_argument(val);
            }
            *it->second = v;
        } catch (std::exception const&) {
            throw config_error("config line " + std::to_string(lineno) +
                               ": bad numeric value '" + val + "'");
        }
    }
    require_valid(p);
    return model_config{p, control_profile::make(p.q0, q1, phi, p.epsilon)};
}

inline model_config load_config(std::string const& path)
{
    std::ifstream f(path);
    if (!f) {
        throw config_error("cannot open config file: " + path);
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace sinebath

#endif  // SINEBATH_MODEL_HPP

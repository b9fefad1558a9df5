#ifndef SINEBATH_REPORT_HPP
#define SINEBATH_REPORT_HPP

#include <json.hpp>

#include "sinebath/model.hpp"
#include "sinebath/perturbation.hpp"
#include "sinebath/thermo.hpp"

namespace sinebath {

// Flat key-value (JSON) reports with all intermediate symbols included, so
// analytic and numeric results can be diffed field by field.

inline nlohmann::json params_json(engine_params const& p)
{
    return {
        {"m", p.m},     {"gamma", p.gamma}, {"k_B", p.k_B},
        {"omega", p.omega}, {"T0", p.T0},   {"T1", p.T1},
        {"q0", p.q0},   {"epsilon", p.epsilon},
        {"model", p.overdamped() ? "overdamped" : "underdamped"},
    };
}

inline nlohmann::json analytic_report_json(engine_params const& p)
{
    nlohmann::json j;
    j["params"] = params_json(p);
    if (p.overdamped()) {
        auto oc = overdamped_optimum(p);
        auto eff = overdamped_efficiency(p);
        double g = std::hypot(p.gamma * p.omega, 2 * p.q0);
        j["g"] = g;
        j["q1_star"] = oc.q1_star;
        j["phi_star"] = oc.phi_star;
        j["power"] = oc.power_leading;
        j["Qh"] = eff.Qh;
        j["Qc"] = eff.Qc;
        j["W"] = eff.W;
        j["eta"] = eff.eta;
        j["eta_degenerate"] = eff.degenerate;
        j["t1"] = eff.t1;
        j["t2"] = eff.t2;
        if (p.T1 > 0) {
            j["carnot_ratio"] = carnot_comparison(p);
            j["carnot_ratio_limit"] = carnot_comparison_limit(p);
        }
    } else {
        auto s = underdamped_syms(p);
        auto oc = underdamped_optimum(p);
        auto eff = underdamped_efficiency(p);
        j["alpha"] = s.alpha;
        j["beta"] = s.beta;
        j["denominator"] = s.denom;
        j["r"] = s.r;
        j["r2"] = s.r2;
        j["theta"] = s.theta;
        j["kappa"] = eff.kappa;
        j["kappa1"] = eff.kappa1;
        j["kappa2"] = eff.kappa2;
        j["q1_star"] = oc.q1_star;
        j["phi_star"] = oc.phi_star;
        j["power"] = oc.power_leading;
        j["Qh"] = eff.Qh;
        j["Qc"] = eff.Qc;
        j["W"] = eff.W;
        j["eta"] = eff.eta;
        j["eta_degenerate"] = eff.degenerate;
        j["mass_note"] = "underdamped mass defaults to m = 1 unless configured";
    }
    return j;
}

inline nlohmann::json cycle_report_json(engine_params const& p,
                                        cycle_report const& r)
{
    nlohmann::json j;
    j["params"] = params_json(p);
    j["W"] = r.W;
    j["Qh"] = r.Qh;
    j["Qc"] = r.Qc;
    j["power"] = r.power;
    j["eta"] = r.eta;
    j["eta_degenerate"] = r.degenerate;
    j["zero_crossings"] = r.zero_crossings;
    return j;
}

}  // namespace sinebath

#endif  // SINEBATH_REPORT_HPP

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace ischemic {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonFiniteInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The eight transported fields. RHO is the only non-diffusing one.
enum class FieldId : int { W = 0, P, E, M, F, N, B, RHO };

inline constexpr int kNumFields = 8;

inline constexpr std::array<FieldId, kNumFields> all_fields()
{
    return {FieldId::W, FieldId::P, FieldId::E, FieldId::M,
            FieldId::F, FieldId::N, FieldId::B, FieldId::RHO};
}

inline const char* field_name(FieldId id)
{
    switch (id) {
        case FieldId::W: return "w";
        case FieldId::P: return "p";
        case FieldId::E: return "e";
        case FieldId::M: return "m";
        case FieldId::F: return "f";
        case FieldId::N: return "n";
        case FieldId::B: return "b";
        case FieldId::RHO: return "rho";
    }
    return "?";
}

/// Model constants and numerics knobs. Field names double as config keys.
struct Parameters {
    // geometry
    double L = 5.0;
    double R0 = 8.0 / 3.0;
    double eps0 = 1.0;          // initial sprout/PDGF transition width
    double gamma = 0.0;         // ischemia level, 0 = healthy
    double beta = 10.0;         // pressure stiffness
    double rho_m = 2.0;         // max matrix volume fraction

    // diffusivities
    double D_w = 0.5;
    double D_p = 1.0;
    double D_e = 1.0;
    double D_m = 5e-2;
    double D_f = 5e-2;
    double D_n = 1e-3;
    double D_b = 7e-4;

    // chemotaxis
    double chi_m = 0.1;
    double chi_f = 0.1;
    double chi_n = 1.0;
    double k_sg = 6.25e-2;      // bounded-flux attenuation

    // caps and drag
    double m_m = 10.0;
    double f_m = 10.0;
    double n_m = 10.0;
    double A = 0.1;             // sprouts-follow-tips drag factor

    // rates
    double w_b = 2.0;           // blood oxygen level
    double k_w = 4.39;
    double k_rho = 5.0 / 16.0;
    double lambda_rho = 0.1;
    double K_wrho = 0.25;
    double K_wf = 0.25;
    double lambda_wf = 0.227;
    double lambda_wm = 4.16;
    double lambda_d = 2.0;
    double k_f = 5.78e-3;
    double lambda_f = 5.2e-3;
    double k_nb = 2.16e-2;
    double k_n = 2.16e-2;
    double k_b = 0.216;
    double lambda_nn = 2.25;
    double lambda_nb = 2.25e-2;

    // rates absent from the published list; placeholder defaults,
    // flagged "reconstructed" in run metadata
    double lambda_ww = 1.0;
    double k_pb = 1.0;
    double k_p = 1.0;
    double lambda_p = 1.0;
    double k_e = 1.0;
    double lambda_e = 1.0;
    double k_m = 1.0;
    double lambda_m = 1.0;

    // numerics
    int N = 200;
    double dt_max = 1e-2;
    double dt_min = 1e-12;
    double cfl_safety = 0.4;
    double T_max = 50.0;
    int max_retries = 40;
    double closure_fraction = 0.02;   // healed when R <= fraction * R0
    double stall_tol = 1e-6;          // |Rdot| < stall_tol * R0
    double q_tol = 1e-8;
    double stall_window = 5.0;
    bool enforce_homeostasis = false; // recompute lambda_rho, k_w, k_f
    bool healthy_init = false;        // no wound: b = 1, p = 0 everywhere

    // tolerance budget for post-hoc checks (scheme-error allowances)
    double decay_tol = 0.05;
    double asymptotics_tol = 0.05;
    double sandwich_slack = 0.02;

    double diffusivity(FieldId id) const
    {
        switch (id) {
            case FieldId::W: return D_w;
            case FieldId::P: return D_p;
            case FieldId::E: return D_e;
            case FieldId::M: return D_m;
            case FieldId::F: return D_f;
            case FieldId::N: return D_n;
            case FieldId::B: return D_b;
            case FieldId::RHO: return 0.0;
        }
        return 0.0;
    }

    /// Lemma-style tip-density ceiling used by the runtime audit.
    double tip_ceiling() const
    {
        return std::max({k_nb / lambda_nb,
                         (k_n + beta * (rho_m - 1.0)) / lambda_nn,
                         n_m});
    }

    void validate() const
    {
        auto require = [](bool ok, const std::string& msg) {
            if (!ok) throw ConfigError(msg);
        };
        require(gamma >= 0.0 && gamma <= 1.0, "gamma must be in [0,1]");
        require(rho_m > 1.0, "rho_m must exceed 1");
        require(R0 > 0.0 && R0 < L, "need 0 < R0 < L");
        require(eps0 > 0.0 && eps0 < L - R0, "need 0 < eps0 < L - R0");
        for (FieldId id : all_fields()) {
            if (id == FieldId::RHO) continue;
            require(diffusivity(id) > 0.0,
                    std::string("diffusivity of ") + field_name(id) + " must be positive");
        }
        require(N >= 8, "N must be at least 8");
        require(beta > 0.0, "beta must be positive");
        require(cfl_safety > 0.0 && cfl_safety <= 1.0, "cfl_safety must be in (0,1]");
        require(dt_max > 0.0 && dt_min > 0.0 && dt_min <= dt_max, "bad dt bounds");
        require(closure_fraction >= 0.0 && closure_fraction <= 1.0,
                "closure_fraction must be in [0,1]");
    }

    /// Replace lambda_rho, k_w, k_f by the values the homeostasis
    /// constraints imply for the other listed parameters.
    void apply_homeostasis()
    {
        lambda_rho = k_rho / (1.0 + K_wrho) * (1.0 - 1.0 / rho_m);
        k_w = (lambda_wf + lambda_wm) / (w_b - 1.0);
        k_f = lambda_f / (1.0 - 1.0 / f_m);
    }
};

namespace detail {

struct ParamEntry {
    const char* key;
    enum Kind { Real, Int, Bool } kind;
    void (*set)(Parameters&, const nlohmann::json&);
    nlohmann::json (*get)(const Parameters&);
};

#define ISCHEMIC_REAL(name)                                              \
    ParamEntry{#name, ParamEntry::Real,                                  \
               [](Parameters& p, const nlohmann::json& v) {              \
                   p.name = v.get<double>();                             \
               },                                                        \
               [](const Parameters& p) { return nlohmann::json(p.name); }}
#define ISCHEMIC_INT(name)                                               \
    ParamEntry{#name, ParamEntry::Int,                                   \
               [](Parameters& p, const nlohmann::json& v) {              \
                   p.name = v.get<int>();                                \
               },                                                        \
               [](const Parameters& p) { return nlohmann::json(p.name); }}
#define ISCHEMIC_BOOL(name)                                              \
    ParamEntry{#name, ParamEntry::Bool,                                  \
               [](Parameters& p, const nlohmann::json& v) {              \
                   p.name = v.get<bool>();                               \
               },                                                        \
               [](const Parameters& p) { return nlohmann::json(p.name); }}

inline const std::vector<ParamEntry>& param_table()
{
    static const std::vector<ParamEntry> table = {
        ISCHEMIC_REAL(L), ISCHEMIC_REAL(R0), ISCHEMIC_REAL(eps0),
        ISCHEMIC_REAL(gamma), ISCHEMIC_REAL(beta), ISCHEMIC_REAL(rho_m),
        ISCHEMIC_REAL(D_w), ISCHEMIC_REAL(D_p), ISCHEMIC_REAL(D_e),
        ISCHEMIC_REAL(D_m), ISCHEMIC_REAL(D_f), ISCHEMIC_REAL(D_n),
        ISCHEMIC_REAL(D_b),
        ISCHEMIC_REAL(chi_m), ISCHEMIC_REAL(chi_f), ISCHEMIC_REAL(chi_n),
        ISCHEMIC_REAL(k_sg),
        ISCHEMIC_REAL(m_m), ISCHEMIC_REAL(f_m), ISCHEMIC_REAL(n_m),
        ISCHEMIC_REAL(A), ISCHEMIC_REAL(w_b),
        ISCHEMIC_REAL(k_w), ISCHEMIC_REAL(k_rho), ISCHEMIC_REAL(lambda_rho),
        ISCHEMIC_REAL(K_wrho), ISCHEMIC_REAL(K_wf),
        ISCHEMIC_REAL(lambda_wf), ISCHEMIC_REAL(lambda_wm),
        ISCHEMIC_REAL(lambda_d),
        ISCHEMIC_REAL(k_f), ISCHEMIC_REAL(lambda_f),
        ISCHEMIC_REAL(k_nb), ISCHEMIC_REAL(k_n), ISCHEMIC_REAL(k_b),
        ISCHEMIC_REAL(lambda_nn), ISCHEMIC_REAL(lambda_nb),
        ISCHEMIC_REAL(lambda_ww), ISCHEMIC_REAL(k_pb),
        ISCHEMIC_REAL(k_p), ISCHEMIC_REAL(lambda_p),
        ISCHEMIC_REAL(k_e), ISCHEMIC_REAL(lambda_e),
        ISCHEMIC_REAL(k_m), ISCHEMIC_REAL(lambda_m),
        ISCHEMIC_INT(N),
        ISCHEMIC_REAL(dt_max), ISCHEMIC_REAL(dt_min),
        ISCHEMIC_REAL(cfl_safety), ISCHEMIC_REAL(T_max),
        ISCHEMIC_INT(max_retries),
        ISCHEMIC_REAL(closure_fraction), ISCHEMIC_REAL(stall_tol),
        ISCHEMIC_REAL(q_tol), ISCHEMIC_REAL(stall_window),
        ISCHEMIC_BOOL(enforce_homeostasis), ISCHEMIC_BOOL(healthy_init),
        ISCHEMIC_REAL(decay_tol), ISCHEMIC_REAL(asymptotics_tol),
        ISCHEMIC_REAL(sandwich_slack),
    };
    return table;
}

#undef ISCHEMIC_REAL
#undef ISCHEMIC_INT
#undef ISCHEMIC_BOOL

} // namespace detail

/// Parse parameters from JSON text. Unknown keys are errors; missing keys
/// keep their defaults. enforce_homeostasis is applied after parsing.
inline Parameters params_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    Parameters p;
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const auto& entry : detail::param_table()) {
            if (it.key() == entry.key) {
                try {
                    entry.set(p, it.value());
                } catch (const nlohmann::json::exception& e) {
                    throw ConfigError("bad value for key '" + it.key() + "': " + e.what());
                }
                known = true;
                break;
            }
        }
        if (!known) throw ConfigError("unknown config key '" + it.key() + "'");
    }
    p.validate();
    if (p.enforce_homeostasis) p.apply_homeostasis();
    return p;
}

inline Parameters load_params(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config parse error in '" + path + "': " + e.what());
    }
    return params_from_json(j);
}

inline nlohmann::json params_to_json(const Parameters& p)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& entry : detail::param_table()) j[entry.key] = entry.get(p);
    return j;
}

/// Keys whose defaults are placeholders rather than published values.
inline std::vector<std::string> reconstructed_rate_keys()
{
    return {"lambda_ww", "k_pb", "k_p", "lambda_p", "k_e", "lambda_e", "k_m", "lambda_m"};
}

} // namespace ischemic

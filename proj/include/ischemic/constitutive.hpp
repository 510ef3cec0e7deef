#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "params.hpp"

namespace ischemic {

/// Sharp sigmoid approximating the Heaviside step: u^6/(1e-6 + u^6) for
/// u >= 0, zero below. Range [0,1), monotone nondecreasing.
inline double heaviside_smooth(double u)
{
    if (u <= 0.0) return 0.0;
    const double u6 = u * u * u * u * u * u;
    return u6 / (1e-6 + u6);
}

/// Matrix pressure: beta*(rho - 1) above the homeostatic density, else 0.
inline double pressure(double rho, double beta)
{
    return rho >= 1.0 ? beta * (rho - 1.0) : 0.0;
}

struct OxygenResponse {
    double G_p;   // PDGF production factor
    double G_e;   // VEGF production factor
    double G_f;   // fibroblast proliferation factor
    double G_b;   // sprout proliferation factor
    double D;     // oxygen-gated death switch, ~0 at normoxia
};

inline double oxygen_G_p(double w)
{
    if (w < 0.5) return 3.0 * w;
    if (w < 1.0) return 2.0 - w;
    if (w < 4.0) return w / 3.0 + 2.0 / 3.0;
    return 2.0;
}

inline double oxygen_G_e(double w)
{
    if (w < 0.5) return 2.0 * w;
    if (w < 1.0) return 2.0 - 2.0 * w;
    if (w < 4.0) return w / 3.0 - 1.0 / 3.0;
    return 1.0;
}

inline OxygenResponse oxygen_response(double w, const Parameters& p)
{
    OxygenResponse r;
    r.G_p = oxygen_G_p(w);
    r.G_e = oxygen_G_e(w);
    r.G_f = (p.K_wf + 1.0) * w / (p.K_wf + w);
    r.G_b = (p.K_wrho + 1.0) * w / (p.K_wrho + w);
    r.D = 1.0 - heaviside_smooth(5.0 * w - 1.0) * heaviside_smooth(1.0 - w / 3.0);
    return r;
}

/// Bounded-flux chemotaxis attenuation: s / sqrt(1 + k_sg s^2). Odd,
/// |result| <= 1/sqrt(k_sg) for k_sg > 0, identity at k_sg = 0.
inline double bounded_taxis(double s, double k_sg)
{
    return s / std::sqrt(1.0 + k_sg * s * s);
}

/// Point values of the eight fields.
struct PointState {
    double w = 0, p = 0, e = 0, m = 0, f = 0, n = 0, b = 0, rho = 0;

    double get(FieldId id) const
    {
        switch (id) {
            case FieldId::W: return w;
            case FieldId::P: return p;
            case FieldId::E: return e;
            case FieldId::M: return m;
            case FieldId::F: return f;
            case FieldId::N: return n;
            case FieldId::B: return b;
            case FieldId::RHO: return rho;
        }
        return 0.0;
    }
};

using Rates = std::array<double, kNumFields>;

enum class KineticOrigin { Attested, ReconstructedDefault };

/// Provenance marker per field: whether the reaction term was taken
/// verbatim from the published equations or completed with a default form.
inline std::array<KineticOrigin, kNumFields> kinetics_provenance()
{
    std::array<KineticOrigin, kNumFields> origin{};
    origin[static_cast<int>(FieldId::W)] = KineticOrigin::Attested;
    origin[static_cast<int>(FieldId::P)] = KineticOrigin::ReconstructedDefault;
    origin[static_cast<int>(FieldId::E)] = KineticOrigin::ReconstructedDefault;
    origin[static_cast<int>(FieldId::M)] = KineticOrigin::ReconstructedDefault;
    origin[static_cast<int>(FieldId::F)] = KineticOrigin::Attested;
    origin[static_cast<int>(FieldId::N)] = KineticOrigin::Attested;
    origin[static_cast<int>(FieldId::B)] = KineticOrigin::ReconstructedDefault;
    origin[static_cast<int>(FieldId::RHO)] = KineticOrigin::Attested;
    return origin;
}

/// Reaction rates of the eight fields at one spatial point.
///
/// At the homeostatic state (w = f = b = rho = 1, p = e = m = n = 0) with
/// gamma = 0 and the homeostasis constraints enforced, every rate vanishes
/// up to the smooth-Heaviside residual in D(w).
inline Rates kinetics(const PointState& s, double gamma, const Parameters& prm)
{
    for (FieldId id : all_fields()) {
        if (!std::isfinite(s.get(id)))
            throw NonFiniteInput(std::string("non-finite ") + field_name(id) +
                                 " passed to kinetics");
    }

    const OxygenResponse ox = oxygen_response(s.w, prm);
    Rates r{};

    // oxygen: vascular supply reduced by ischemia, consumption by
    // fibroblasts and macrophages plus natural decay
    const double sink =
        (prm.lambda_wf * s.f + prm.lambda_wm * s.m) *
            (1.0 + prm.lambda_ww * s.p / (1.0 + s.p)) +
        prm.lambda_wm;
    r[static_cast<int>(FieldId::W)] =
        prm.k_w * s.b * ((1.0 - gamma) * prm.w_b - s.w) - sink * s.w;

    // PDGF / VEGF: secretion by macrophages, first-order decay
    r[static_cast<int>(FieldId::P)] = prm.k_p * ox.G_p * s.m - prm.lambda_p * s.p;
    r[static_cast<int>(FieldId::E)] = prm.k_e * ox.G_e * s.m - prm.lambda_e * s.e;

    // macrophages: recruitment from the vasculature driven by PDGF
    r[static_cast<int>(FieldId::M)] =
        prm.k_m * s.b * s.p / (1.0 + s.p) - prm.lambda_m * s.m;

    // fibroblasts: oxygen-gated logistic growth, death enhanced at
    // pathological oxygen levels
    r[static_cast<int>(FieldId::F)] =
        prm.k_f * ox.G_f * s.f * (1.0 - s.f / prm.f_m) -
        prm.lambda_f * s.f * (1.0 + prm.lambda_d * ox.D);

    // capillary tips: branching from sprouts and self-branching driven by
    // VEGF, anastomosis losses
    const double e_sat = s.e / (1.0 + s.e);
    r[static_cast<int>(FieldId::N)] =
        s.b * (prm.k_nb * e_sat - prm.lambda_nb * s.n) +
        (prm.k_n * e_sat - prm.lambda_nn * s.n) * s.n;

    // capillary sprouts: logistic completion of the quadratic pruning term
    r[static_cast<int>(FieldId::B)] = prm.k_b * ox.G_b * s.b * (1.0 - s.b);

    // matrix: oxygen-limited collagen secretion by fibroblasts, MMP decay
    r[static_cast<int>(FieldId::RHO)] =
        prm.k_rho * s.w / (s.w + prm.K_wrho) * s.f * (1.0 - s.rho / prm.rho_m) -
        prm.lambda_rho * s.rho;

    return r;
}

struct HomeostasisCheck {
    std::string constraint;   // parameter the constraint pins down
    double listed;            // configured value
    double implied;           // value the constraint computes
    double residual;          // |listed - implied| / |implied|
    bool pass;                // residual <= 1%
};

/// Evaluate the three no-net-growth constraints against the configured
/// rates. Warns on mismatch, never rejects; simulation proceeds with the
/// listed values unless enforce_homeostasis is set.
inline std::vector<HomeostasisCheck> validate_homeostasis(const Parameters& p)
{
    auto make = [](const std::string& name, double listed, double implied) {
        HomeostasisCheck c;
        c.constraint = name;
        c.listed = listed;
        c.implied = implied;
        c.residual = std::abs(listed - implied) / std::abs(implied);
        c.pass = c.residual <= 0.01;
        return c;
    };
    std::vector<HomeostasisCheck> checks;
    checks.push_back(make("lambda_rho", p.lambda_rho,
                          p.k_rho / (1.0 + p.K_wrho) * (1.0 - 1.0 / p.rho_m)));
    checks.push_back(make("k_w", p.k_w, (p.lambda_wf + p.lambda_wm) / (p.w_b - 1.0)));
    checks.push_back(make("k_f", p.k_f, p.lambda_f / (1.0 - 1.0 / p.f_m)));
    return checks;
}

/// Initial sprout density ramp g((r - R0)/eps0): C^1, monotone 0 -> 1.
inline double initial_b_ramp(double z)
{
    if (z <= 0.0) return 0.0;
    if (z <= 0.25) return 8.0 / 3.0 * z * z;
    if (z < 0.75) return 4.0 / 3.0 * z - 1.0 / 6.0;
    if (z <= 1.0) return 1.0 - 8.0 / 3.0 * (1.0 - z) * (1.0 - z);
    return 1.0;
}

inline double initial_b_profile(double r, const Parameters& p)
{
    return initial_b_ramp((r - p.R0) / p.eps0);
}

/// Initial PDGF bump: quartic with compact support on [R0, R0 + eps0],
/// C^3 at the junction, slope -k_pb/D_p at the wound edge.
inline double initial_p_profile(double r, const Parameters& p)
{
    const double z = (r - p.R0) / p.eps0;
    if (z >= 1.0) return 0.0;
    const double s = 1.0 - z;
    return p.k_pb * p.eps0 / (4.0 * p.D_p) * s * s * s * s;
}

} // namespace ischemic

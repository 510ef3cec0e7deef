#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "constitutive.hpp"
#include "grid.hpp"
#include "mechanics.hpp"
#include "params.hpp"

namespace ischemic {

class StepFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonFiniteState : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct WoundState {
    double t = 0.0;
    double R = 0.0;
    Fields fields;
    VelocityProfile vel;      // consistent with fields[RHO] and R
    double cumQ = 0.0;        // trapezoidal accumulation of Q over accepted steps
};

struct StepReport {
    double t = 0.0;           // time at the end of the step
    double dt = 0.0;
    double Q = 0.0;           // pressure integral at the start of the step
    double Rdot = 0.0;
    double R = 0.0;           // radius at the end of the step
    int retries = 0;
    std::array<double, kNumFields> field_min{};
    std::array<double, kNumFields> field_max{};
    std::array<double, kNumFields> field_integral{};   // int r u dr
    double bc_residual = 0.0; // worst Robin residual over diffusing fields
    bool audits_pass = true;
};

struct Outcome {
    enum class Kind { Healed, Stalled, Undecided } kind = Kind::Undecided;
    double t_heal = 0.0;   // Healed
    double R_inf = 0.0;    // Stalled
    double t_stall = 0.0;  // Stalled

    const char* name() const
    {
        switch (kind) {
            case Kind::Healed: return "Healed";
            case Kind::Stalled: return "Stalled";
            case Kind::Undecided: return "Undecided";
        }
        return "?";
    }
};

namespace detail {

inline void refresh_velocity(WoundState& s, const Parameters& prm)
{
    s.vel = compute_velocity(field(s.fields, FieldId::RHO), s.R, prm.L, prm.beta);
}

inline std::array<double, kNumFields> field_integrals(const WoundState& s,
                                                      const Parameters& prm)
{
    std::array<double, kNumFields> out{};
    const int n = prm.N;
    const double dxi = 1.0 / n;
    const double width = prm.L - s.R;
    for (FieldId id : all_fields()) {
        const auto& u = field(s.fields, id);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = s.R + (i + 0.5) * dxi * width;
            sum += r * u[i];
        }
        out[static_cast<int>(id)] = sum * dxi * width;
    }
    return out;
}

struct AuditResult {
    bool pass = true;
    std::string what;
};

/// Positivity and a-priori bounds; violations reject the step rather than
/// being clipped.
inline AuditResult audit(const WoundState& s, const Parameters& prm)
{
    AuditResult a;
    const double n_cap = prm.tip_ceiling() + 1e-12;
    for (FieldId id : all_fields()) {
        for (double x : field(s.fields, id)) {
            if (!std::isfinite(x)) {
                a.pass = false;
                a.what = std::string("non-finite ") + field_name(id);
                return a;
            }
            if (x < -1e-12) {
                a.pass = false;
                a.what = std::string("negative ") + field_name(id);
                return a;
            }
        }
    }
    for (double x : field(s.fields, FieldId::RHO)) {
        if (x > prm.rho_m + 1e-12) {
            a.pass = false;
            a.what = "rho above rho_m";
            return a;
        }
    }
    for (double x : field(s.fields, FieldId::N)) {
        if (x > n_cap) {
            a.pass = false;
            a.what = "tip density above supersolution ceiling";
            return a;
        }
    }
    const double vcap = prm.beta * (prm.rho_m - 1.0) * (1.0 + 1e-10);
    const Grid g = build_grid(prm.N, s.R, prm.L);
    for (int i = 0; i < prm.N; ++i) {
        if (std::abs(s.vel.v_center[i]) / g.r_center[i] > vcap) {
            a.pass = false;
            a.what = "|v|/r above pressure bound";
            return a;
        }
    }
    return a;
}

/// Worst Robin/flux residual of the realized boundary values, recomputed
/// from closures rebuilt at the new time.
inline double bc_residual(const WoundState& s, const Grid& g, const Parameters& prm)
{
    const Closures cl = build_closures(s.fields, g, prm);
    double worst = 0.0;
    for (FieldId id : all_fields()) {
        if (id == FieldId::RHO) continue;
        const auto& u = field(s.fields, id);
        const EndClosure& oc = cl[static_cast<int>(id)].outer;
        const double ghost = oc.alpha * u[g.N - 1] + oc.delta;
        const double face = 0.5 * (u[g.N - 1] + ghost);
        const double grad = (ghost - u[g.N - 1]) / g.h_r;
        const double X = oc.taxis_flux / prm.diffusivity(id);
        const double target = detail::boundary_target(id);
        const double res =
            (1.0 - prm.gamma) * (face - target) + prm.gamma * prm.L * (grad - X);
        worst = std::max(worst, std::abs(res));
    }
    return worst;
}

} // namespace detail

/// Initial data: intact matrix and fibroblasts, oxygenated tissue, sprout
/// ramp and PDGF bump near the wound edge (or uniform healthy values when
/// healthy_init is set).
inline WoundState init_state(const Parameters& prm)
{
    prm.validate();
    WoundState s;
    s.t = 0.0;
    s.R = prm.R0;
    const Grid g = build_grid(prm.N, prm.R0, prm.L);
    for (FieldId id : all_fields()) field(s.fields, id).assign(prm.N, 0.0);
    for (int i = 0; i < prm.N; ++i) {
        const double r = g.r_center[i];
        field(s.fields, FieldId::W)[i] = 1.0;
        field(s.fields, FieldId::F)[i] = 1.0;
        field(s.fields, FieldId::RHO)[i] = 1.0;
        field(s.fields, FieldId::B)[i] =
            prm.healthy_init ? 1.0 : initial_b_profile(r, prm);
        field(s.fields, FieldId::P)[i] =
            prm.healthy_init ? 0.0 : initial_p_profile(r, prm);
    }
    detail::refresh_velocity(s, prm);
    return s;
}

/// CFL-style bound: transport speeds, a finite-difference estimate of the
/// stiffest reaction diagonal, and dt_max.
inline double choose_dt(const WoundState& s, const TransportRates& transport,
                        const Parameters& prm)
{
    double dt = prm.dt_max;
    const double dxi = 1.0 / prm.N;
    if (transport.max_speed_xi > 0.0)
        dt = std::min(dt, dxi / transport.max_speed_xi);

    // reaction diagonal estimate by one-sided differences at each cell
    double max_diag = 0.0;
    for (int i = 0; i < prm.N; ++i) {
        PointState ps;
        ps.w = field(s.fields, FieldId::W)[i];
        ps.p = field(s.fields, FieldId::P)[i];
        ps.e = field(s.fields, FieldId::E)[i];
        ps.m = field(s.fields, FieldId::M)[i];
        ps.f = field(s.fields, FieldId::F)[i];
        ps.n = field(s.fields, FieldId::N)[i];
        ps.b = field(s.fields, FieldId::B)[i];
        ps.rho = field(s.fields, FieldId::RHO)[i];
        const Rates base = kinetics(ps, prm.gamma, prm);
        for (FieldId id : all_fields()) {
            PointState pert = ps;
            const double u0 = ps.get(id);
            const double eps = 1e-6 * (1.0 + std::abs(u0));
            switch (id) {
                case FieldId::W: pert.w += eps; break;
                case FieldId::P: pert.p += eps; break;
                case FieldId::E: pert.e += eps; break;
                case FieldId::M: pert.m += eps; break;
                case FieldId::F: pert.f += eps; break;
                case FieldId::N: pert.n += eps; break;
                case FieldId::B: pert.b += eps; break;
                case FieldId::RHO: pert.rho += eps; break;
            }
            const Rates shifted = kinetics(pert, prm.gamma, prm);
            const int k = static_cast<int>(id);
            max_diag = std::max(max_diag, std::abs(shifted[k] - base[k]) / eps);
        }
    }
    if (max_diag > 0.0) dt = std::min(dt, 1.0 / max_diag);
    return prm.cfl_safety * dt;
}

/// One accepted step: mechanics from the current rho, explicit rho and
/// transport/kinetics update, implicit diffusion, explicit boundary motion,
/// then the invariant audit with halve-and-retry on failure.
///
/// dt_request, when nonnegative, overrides the CFL choice (a zero request
/// returns the state unchanged).
inline std::pair<WoundState, StepReport> step(const WoundState& state,
                                              const Parameters& prm,
                                              double dt_request = -1.0,
                                              double dt_cap = std::numeric_limits<double>::infinity())
{
    const Grid g = build_grid(prm.N, state.R, prm.L);
    const TransformCoeffs co = transform_coeffs(g, state.vel);
    const Closures cl = build_closures(state.fields, g, prm);
    const TransportRates transport = advection_taxis_operator(state.fields, co, g, prm, cl);

    double dt = dt_request >= 0.0 ? dt_request : choose_dt(state, transport, prm);
    dt = std::min(dt, dt_cap);

    // pointwise kinetics from the frozen state
    std::array<std::vector<double>, kNumFields> reaction;
    for (auto& v : reaction) v.assign(prm.N, 0.0);
    for (int i = 0; i < prm.N; ++i) {
        PointState ps;
        ps.w = field(state.fields, FieldId::W)[i];
        ps.p = field(state.fields, FieldId::P)[i];
        ps.e = field(state.fields, FieldId::E)[i];
        ps.m = field(state.fields, FieldId::M)[i];
        ps.f = field(state.fields, FieldId::F)[i];
        ps.n = field(state.fields, FieldId::N)[i];
        ps.b = field(state.fields, FieldId::B)[i];
        ps.rho = field(state.fields, FieldId::RHO)[i];
        const Rates r = kinetics(ps, prm.gamma, prm);
        for (int k = 0; k < kNumFields; ++k) reaction[k][i] = r[k];
    }

    const std::vector<double> rho_rate = rho_transport_rate(
        field(state.fields, FieldId::RHO), co, g, reaction[static_cast<int>(FieldId::RHO)]);

    StepReport rep;
    rep.Q = state.vel.Q;
    rep.Rdot = state.vel.Rdot;

    for (int attempt = 0;; ++attempt) {
        WoundState next;
        next.t = state.t + dt;
        next.fields = state.fields;

        auto& rho_new = field(next.fields, FieldId::RHO);
        for (int i = 0; i < prm.N; ++i) rho_new[i] += dt * rho_rate[i];

        for (FieldId id : all_fields()) {
            if (id == FieldId::RHO) continue;
            auto& u = field(next.fields, id);
            const auto& tr = transport.rate[static_cast<int>(id)];
            const auto& re = reaction[static_cast<int>(id)];
            for (int i = 0; i < prm.N; ++i) u[i] += dt * (tr[i] + re[i]);
            implicit_diffusion_update(u, id, g, prm, cl[static_cast<int>(id)], dt);
        }

        next.R = state.R + dt * state.vel.Rdot;
        if (!(next.R > 0.0) || next.R >= prm.L) {
            // geometry violation is treated like a failed audit
            if (dt <= prm.dt_min || attempt >= prm.max_retries)
                throw StepFailure("boundary update left the admissible geometry");
            dt *= 0.5;
            continue;
        }
        detail::refresh_velocity(next, prm);
        next.cumQ = state.cumQ + 0.5 * dt * (state.vel.Q + next.vel.Q);

        const detail::AuditResult a = detail::audit(next, prm);
        if (!a.pass) {
            bool nonfinite = a.what.rfind("non-finite", 0) == 0;
            if (nonfinite && dt <= prm.dt_min)
                throw NonFiniteState("state went non-finite: " + a.what);
            if (dt <= prm.dt_min || attempt >= prm.max_retries)
                throw StepFailure("audit kept failing at dt_min: " + a.what);
            dt *= 0.5;
            continue;
        }

        rep.t = next.t;
        rep.dt = dt;
        rep.R = next.R;
        rep.retries = attempt;
        rep.audits_pass = true;
        for (FieldId id : all_fields()) {
            const auto& u = field(next.fields, id);
            const int k = static_cast<int>(id);
            rep.field_min[k] = *std::min_element(u.begin(), u.end());
            rep.field_max[k] = *std::max_element(u.begin(), u.end());
        }
        rep.field_integral = detail::field_integrals(next, prm);
        const Grid g_new = build_grid(prm.N, next.R, prm.L);
        rep.bc_residual = detail::bc_residual(next, g_new, prm);
        return {std::move(next), rep};
    }
}

struct RunResult {
    Outcome outcome;
    std::vector<StepReport> series;   // includes a t = 0 row
    WoundState final_state;
    bool step_failed = false;
    std::string failure;
};

/// March to Healed, Stalled, or T_max. Deterministic for fixed params.
inline RunResult run(const Parameters& prm, std::optional<double> horizon = std::nullopt)
{
    const double T = horizon.value_or(prm.T_max);
    RunResult out;
    WoundState s = init_state(prm);

    StepReport r0;
    r0.t = 0.0;
    r0.dt = 0.0;
    r0.Q = s.vel.Q;
    r0.Rdot = s.vel.Rdot;
    r0.R = s.R;
    for (FieldId id : all_fields()) {
        const auto& u = field(s.fields, id);
        const int k = static_cast<int>(id);
        r0.field_min[k] = *std::min_element(u.begin(), u.end());
        r0.field_max[k] = *std::max_element(u.begin(), u.end());
    }
    r0.field_integral = detail::field_integrals(s, prm);
    out.series.push_back(r0);

    double quiet_since = -1.0;   // start of the current low-activity window

    auto classify_healed = [&](const WoundState& st) {
        return st.R <= prm.closure_fraction * prm.R0;
    };

    if (classify_healed(s)) {
        out.outcome.kind = Outcome::Kind::Healed;
        out.outcome.t_heal = 0.0;
        out.final_state = std::move(s);
        return out;
    }

    while (s.t < T * (1.0 - 1e-14)) {
        std::pair<WoundState, StepReport> next;
        try {
            next = step(s, prm, -1.0, T - s.t);   // land exactly on the horizon
        } catch (const StepFailure& e) {
            out.step_failed = true;
            out.failure = e.what();
            break;
        } catch (const NonFiniteState& e) {
            out.step_failed = true;
            out.failure = e.what();
            break;
        }
        s = std::move(next.first);
        out.series.push_back(next.second);

        if (classify_healed(s)) {
            out.outcome.kind = Outcome::Kind::Healed;
            out.outcome.t_heal = s.t;
            break;
        }

        const bool quiet =
            std::abs(s.vel.Rdot) < prm.stall_tol * prm.R0 && s.vel.Q < prm.q_tol;
        if (quiet) {
            if (quiet_since < 0.0) quiet_since = s.t;
            if (s.t - quiet_since >= prm.stall_window) {
                out.outcome.kind = Outcome::Kind::Stalled;
                out.outcome.R_inf = s.R;
                out.outcome.t_stall = quiet_since;
                break;
            }
        } else {
            quiet_since = -1.0;
        }
    }

    out.final_state = std::move(s);
    return out;
}

} // namespace ischemic

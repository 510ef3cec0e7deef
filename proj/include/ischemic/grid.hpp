#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "constitutive.hpp"
#include "mechanics.hpp"
#include "params.hpp"

namespace ischemic {

class InvalidGeometry : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonDiffusingField : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Fields = std::array<std::vector<double>, kNumFields>;

inline std::vector<double>& field(Fields& f, FieldId id) { return f[static_cast<int>(id)]; }
inline const std::vector<double>& field(const Fields& f, FieldId id)
{
    return f[static_cast<int>(id)];
}

/// Uniform partition of xi in [0,1] with the affine map r = (1-xi) R + xi L.
struct Grid {
    int N = 0;
    double R = 0.0, L = 0.0;
    double dxi = 0.0;
    double width = 0.0;   // L - R
    double h_r = 0.0;     // physical cell width, dxi * (L - R)
    std::vector<double> r_center;   // N values
    std::vector<double> r_face;     // N+1 values

    double xi_center(int i) const { return (i + 0.5) * dxi; }
    double r_of_xi(double xi) const { return (1.0 - xi) * R + xi * L; }
};

inline Grid build_grid(int N, double R, double L)
{
    if (N < 8) throw InvalidGeometry("grid needs at least 8 cells");
    if (!(R > 0.0) || !(R < L)) throw InvalidGeometry("need 0 < R < L");
    Grid g;
    g.N = N;
    g.R = R;
    g.L = L;
    g.dxi = 1.0 / N;
    g.width = L - R;
    g.h_r = g.dxi * g.width;
    g.r_center.resize(N);
    g.r_face.resize(N + 1);
    for (int i = 0; i < N; ++i) g.r_center[i] = g.r_of_xi(g.xi_center(i));
    for (int j = 0; j <= N; ++j) g.r_face[j] = g.r_of_xi(j * g.dxi);
    g.r_face[0] = R;
    g.r_face[N] = L;
    return g;
}

/// Front-fixing transform coefficients. M is the comoving advection speed
/// in xi; it vanishes at both ends because v(R) = Rdot and v(L) = 0.
struct TransformCoeffs {
    std::vector<double> M_face;     // N+1
    std::vector<double> K_center;   // N
    double Rdot = 0.0;
};

inline double transform_K(double xi, double Rdot, double R, double L)
{
    const double r = (1.0 - xi) * R + xi * L;
    return Rdot / (L - R) * ((1.0 - xi) * (L - R) / r - 1.0);
}

inline TransformCoeffs transform_coeffs(const Grid& g, const VelocityProfile& vel)
{
    TransformCoeffs c;
    c.Rdot = vel.Rdot;
    c.M_face.resize(g.N + 1);
    c.K_center.resize(g.N);
    for (int j = 0; j <= g.N; ++j) {
        const double xi = j * g.dxi;
        c.M_face[j] = (vel.Rdot * (xi - 1.0) + vel.v_face[j]) / g.width;
    }
    for (int i = 0; i < g.N; ++i)
        c.K_center[i] = transform_K(g.xi_center(i), vel.Rdot, g.R, g.L);
    return c;
}

/// Ghost-cell closure for one end of one field: ghost = alpha * u_adj +
/// delta, plus the explicit taxis flux carried through that face.
struct EndClosure {
    double alpha = 1.0;
    double delta = 0.0;
    double taxis_flux = 0.0;   // physical chemotactic flux at the face
};

struct FieldClosure {
    EndClosure wound;   // xi = 0
    EndClosure outer;   // xi = 1
};

using Closures = std::array<FieldClosure, kNumFields>;

namespace detail {

inline double boundary_target(FieldId id)
{
    switch (id) {
        case FieldId::W:
        case FieldId::F:
        case FieldId::B: return 1.0;
        default: return 0.0;
    }
}

/// Robin elimination at the outer face: (1-gamma)(u_face - ustar)
/// + gamma L (du/dr - X) = 0 with the face value and gradient expressed
/// through the ghost cell. X is the lagged taxis expression.
inline EndClosure robin_outer(double gamma, double L, double h_r, double ustar, double X)
{
    EndClosure c;
    const double a = 0.5 * (1.0 - gamma);
    const double b = gamma * L / h_r;
    const double denom = a + b;
    c.alpha = (b - a) / denom;
    c.delta = ((1.0 - gamma) * ustar + gamma * L * X) / denom;
    return c;
}

} // namespace detail

/// Prescribed PDGF gradient at the wound edge (secretion decreases with
/// healing): dp/dr = -k_pb R / (D_p R0).
inline double wound_p_gradient(double R, const Parameters& prm)
{
    // intact tissue secretes no platelet-derived growth factor at r = R
    if (prm.healthy_init) return 0.0;
    return -prm.k_pb * R / (prm.D_p * prm.R0);
}

/// Build the gamma-parameterized boundary closures for the seven diffusing
/// fields from the current cell values. Taxis contributions are evaluated
/// from the same lagged values that the explicit taxis operator uses, so
/// the discrete total flux honors each Robin/zero-flux condition.
inline Closures build_closures(const Fields& u, const Grid& g, const Parameters& prm)
{
    const double gamma = prm.gamma;
    const double h = g.h_r;
    const int last = g.N - 1;
    Closures cl{};

    auto scalar = [&](FieldId id) {
        FieldClosure c;
        c.wound.alpha = 1.0;
        c.wound.delta = 0.0;
        c.outer = detail::robin_outer(gamma, g.L, h, detail::boundary_target(id), 0.0);
        return c;
    };
    cl[static_cast<int>(FieldId::W)] = scalar(FieldId::W);
    cl[static_cast<int>(FieldId::E)] = scalar(FieldId::E);

    // PDGF: Robin outer, prescribed gradient at the wound
    {
        FieldClosure c;
        c.outer = detail::robin_outer(gamma, g.L, h, 0.0, 0.0);
        c.wound.alpha = 1.0;
        c.wound.delta = -h * wound_p_gradient(g.R, prm);   // ghost = u0 - h * dp/dr
        cl[static_cast<int>(FieldId::P)] = c;
    }

    const auto& w = field(u, FieldId::W);
    const auto& p = field(u, FieldId::P);
    const auto& e = field(u, FieldId::E);
    const auto& m = field(u, FieldId::M);
    const auto& f = field(u, FieldId::F);
    const auto& n = field(u, FieldId::N);
    const auto& b = field(u, FieldId::B);
    const auto& rho = field(u, FieldId::RHO);

    auto outer_gradient = [&](FieldId id, const std::vector<double>& a) {
        const EndClosure& oc = cl[static_cast<int>(id)].outer;
        const double ghost = oc.alpha * a[last] + oc.delta;
        return (ghost - a[last]) / h;
    };

    // macrophages and fibroblasts chemotax toward PDGF
    const double sp_outer = outer_gradient(FieldId::P, p);
    const double sp_wound = wound_p_gradient(g.R, prm);
    auto chemo_closure = [&](FieldId id, const std::vector<double>& uu, double chi,
                             double D_u, double cap) {
        FieldClosure c;
        const double tw = chi * rho[0] * uu[0] * heaviside_smooth(1.0 - uu[0] / cap) *
                          bounded_taxis(sp_wound, prm.k_sg);
        c.wound.alpha = 1.0;
        c.wound.delta = -h * tw / D_u;   // diffusive flux matches taxis flux
        c.wound.taxis_flux = tw;
        const double to = chi * rho[last] * uu[last] *
                          heaviside_smooth(1.0 - uu[last] / cap) *
                          bounded_taxis(sp_outer, prm.k_sg);
        c.outer = detail::robin_outer(gamma, g.L, h, detail::boundary_target(id), to / D_u);
        c.outer.taxis_flux = to;
        return c;
    };
    cl[static_cast<int>(FieldId::M)] = chemo_closure(FieldId::M, m, prm.chi_m, prm.D_m, prm.m_m);
    cl[static_cast<int>(FieldId::F)] = chemo_closure(FieldId::F, f, prm.chi_f, prm.D_f, prm.f_m);

    // capillary tips chemotax toward VEGF; zero gradient at the wound,
    // where the VEGF gradient vanishes as well
    {
        FieldClosure c;
        c.wound.alpha = 1.0;
        const double se_outer = outer_gradient(FieldId::E, e);
        const double to = prm.chi_n * rho[last] * n[last] *
                          heaviside_smooth(1.0 - n[last] / prm.n_m) *
                          bounded_taxis(se_outer, prm.k_sg);
        c.outer = detail::robin_outer(gamma, g.L, h, 0.0, to / prm.D_n);
        c.outer.taxis_flux = to;
        cl[static_cast<int>(FieldId::N)] = c;
    }

    // sprouts are dragged along tips; both attractant gradients vanish at
    // the wound. The outer flux expression is normalized by D_b so that
    // gamma = 1 closes the total flux.
    {
        FieldClosure c;
        c.wound.alpha = 1.0;
        const double sn_outer = outer_gradient(FieldId::N, n);
        const double se_outer = outer_gradient(FieldId::E, e);
        const double to = prm.A * prm.D_n * b[last] * bounded_taxis(sn_outer, prm.k_sg) -
                          prm.A * prm.chi_n * b[last] * rho[last] * n[last] *
                              heaviside_smooth(1.0 - n[last] / prm.n_m) *
                              bounded_taxis(se_outer, prm.k_sg);
        c.outer = detail::robin_outer(gamma, g.L, h, 1.0, to / prm.D_b);
        c.outer.taxis_flux = to;
        cl[static_cast<int>(FieldId::B)] = c;
    }

    (void)w;
    return cl;
}

/// Explicit conservative diffusion rate (1/r) d_r (r D du/dr) with boundary
/// fluxes supplied by the ghost closures. The implicit solver assembles the
/// same coefficients.
inline std::vector<double> diffusion_operator(std::span<const double> u, FieldId id,
                                              const Grid& g, const Parameters& prm,
                                              const FieldClosure& cl)
{
    if (id == FieldId::RHO) throw NonDiffusingField("rho does not diffuse");
    const double D = prm.diffusivity(id);
    const int N = g.N;
    const double h = g.h_r;
    std::vector<double> flux(N + 1);
    for (int j = 1; j < N; ++j) flux[j] = D * (u[j] - u[j - 1]) / h;
    const double ghost_w = cl.wound.alpha * u[0] + cl.wound.delta;
    const double ghost_o = cl.outer.alpha * u[N - 1] + cl.outer.delta;
    flux[0] = D * (u[0] - ghost_w) / h;
    flux[N] = D * (ghost_o - u[N - 1]) / h;
    std::vector<double> rate(N);
    for (int i = 0; i < N; ++i)
        rate[i] = (g.r_face[i + 1] * flux[i + 1] - g.r_face[i] * flux[i]) /
                  (g.r_center[i] * h);
    return rate;
}

/// Backward-Euler diffusion update: solves (I - dt Ldiff) u_new = u with the
/// closure's alpha folded into the matrix and delta into the right-hand side.
inline void implicit_diffusion_update(std::vector<double>& u, FieldId id, const Grid& g,
                                      const Parameters& prm, const FieldClosure& cl,
                                      double dt)
{
    if (id == FieldId::RHO) throw NonDiffusingField("rho does not diffuse");
    const double D = prm.diffusivity(id);
    const int N = g.N;
    const double h = g.h_r;

    std::vector<double> lower(N), diag(N), upper(N), rhs(u.begin(), u.end());
    for (int i = 0; i < N; ++i) {
        const double cw = dt * D * g.r_face[i] / (g.r_center[i] * h * h);
        const double co = dt * D * g.r_face[i + 1] / (g.r_center[i] * h * h);
        lower[i] = -cw;
        upper[i] = -co;
        double d = 1.0 + cw + co;
        if (i == 0) {
            // wound face flux uses ghost = alpha u0 + delta
            d = 1.0 + co + cw * (1.0 - cl.wound.alpha);
            rhs[i] += cw * cl.wound.delta;
            lower[i] = 0.0;
        }
        if (i == N - 1) {
            // outer face flux F = D ((alpha - 1) u_{N-1} + delta)/h
            d = 1.0 + (i == 0 ? cw * (1.0 - cl.wound.alpha) : cw) +
                co * (1.0 - cl.outer.alpha);
            rhs[i] += co * cl.outer.delta;
            upper[i] = 0.0;
        }
        diag[i] = d;
    }

    // Thomas elimination
    for (int i = 1; i < N; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    u[N - 1] = rhs[N - 1] / diag[N - 1];
    for (int i = N - 2; i >= 0; --i) u[i] = (rhs[i] - upper[i] * u[i + 1]) / diag[i];
}

/// Per-cell rates of the comoving advection, the -K u term, and the
/// bounded-taxis fluxes, for all eight fields. Also reports the largest
/// transport speed in xi units for the CFL bound.
struct TransportRates {
    std::array<std::vector<double>, kNumFields> rate;
    double max_speed_xi = 0.0;   // max over faces of |M| + |taxis|/(L-R)
};

inline TransportRates advection_taxis_operator(const Fields& u, const TransformCoeffs& co,
                                               const Grid& g, const Parameters& prm,
                                               const Closures& cl)
{
    const int N = g.N;
    const double h = g.h_r;
    TransportRates out;
    for (auto& v : out.rate) v.assign(N, 0.0);

    for (FieldId id : all_fields()) {
        const auto& uu = field(u, id);
        for (double x : uu)
            if (!std::isfinite(x))
                throw NonFiniteInput(std::string("non-finite ") + field_name(id) +
                                     " in transport operator");
        auto& rate = out.rate[static_cast<int>(id)];

        // upwind comoving advection; end fluxes vanish with M
        std::vector<double> G(N + 1, 0.0);
        for (int j = 1; j < N; ++j) {
            const double Mj = co.M_face[j];
            G[j] = Mj * (Mj >= 0.0 ? uu[j - 1] : uu[j]);
            out.max_speed_xi = std::max(out.max_speed_xi, std::abs(Mj));
        }
        for (int i = 0; i < N; ++i) {
            rate[i] = -(g.r_face[i + 1] * G[i + 1] - g.r_face[i] * G[i]) /
                          (g.r_center[i] * g.dxi) -
                      co.K_center[i] * uu[i];
        }
    }

    const auto& e = field(u, FieldId::E);
    const auto& p = field(u, FieldId::P);
    const auto& n = field(u, FieldId::N);
    const auto& rho = field(u, FieldId::RHO);

    // one saturated-chemotaxis flux: carried field uu drifting along the
    // bounded gradient of attractant a
    auto add_chemo = [&](FieldId id, const std::vector<double>& a, double chi, double cap) {
        const auto& uu = field(u, id);
        auto& rate = out.rate[static_cast<int>(id)];
        const FieldClosure& c = cl[static_cast<int>(id)];
        std::vector<double> T(N + 1, 0.0);
        T[0] = c.wound.taxis_flux;
        T[N] = c.outer.taxis_flux;
        for (int j = 1; j < N; ++j) {
            const double s = (a[j] - a[j - 1]) / h;
            const double tau = bounded_taxis(s, prm.k_sg);
            const double rho_f = 0.5 * (rho[j - 1] + rho[j]);
            const double uup = tau >= 0.0 ? uu[j - 1] : uu[j];
            const double speed = chi * rho_f * heaviside_smooth(1.0 - uup / cap) * tau;
            T[j] = speed * uup;
            out.max_speed_xi = std::max(out.max_speed_xi, std::abs(speed) / g.width);
        }
        for (int i = 0; i < N; ++i)
            rate[i] -= (g.r_face[i + 1] * T[i + 1] - g.r_face[i] * T[i]) /
                       (g.r_center[i] * h);
    };
    add_chemo(FieldId::M, p, prm.chi_m, prm.m_m);
    add_chemo(FieldId::F, p, prm.chi_f, prm.f_m);
    add_chemo(FieldId::N, e, prm.chi_n, prm.n_m);

    // sprouts follow tips: drag along the tip gradient plus the opposing
    // share of the tips' own chemotactic drift
    {
        const auto& b = field(u, FieldId::B);
        auto& rate = out.rate[static_cast<int>(FieldId::B)];
        const FieldClosure& c = cl[static_cast<int>(FieldId::B)];
        std::vector<double> T(N + 1, 0.0);
        T[0] = c.wound.taxis_flux;
        T[N] = c.outer.taxis_flux;
        for (int j = 1; j < N; ++j) {
            const double sn = (n[j] - n[j - 1]) / h;
            const double se = (e[j] - e[j - 1]) / h;
            const double rho_f = 0.5 * (rho[j - 1] + rho[j]);
            const double n_f = 0.5 * (n[j - 1] + n[j]);
            const double c1 = prm.A * prm.D_n * bounded_taxis(sn, prm.k_sg);
            const double c2 = -prm.A * prm.chi_n * rho_f * n_f *
                              heaviside_smooth(1.0 - n_f / prm.n_m) *
                              bounded_taxis(se, prm.k_sg);
            T[j] = c1 * (c1 >= 0.0 ? b[j - 1] : b[j]) + c2 * (c2 >= 0.0 ? b[j - 1] : b[j]);
            out.max_speed_xi =
                std::max(out.max_speed_xi, (std::abs(c1) + std::abs(c2)) / g.width);
        }
        for (int i = 0; i < N; ++i)
            rate[i] -= (g.r_face[i + 1] * T[i + 1] - g.r_face[i] * T[i]) /
                       (g.r_center[i] * h);
    }

    return out;
}

/// Full explicit rate for the non-diffusing matrix density: comoving
/// advection, kinetics, and the -K rho transform term. Boundary fluxes are
/// exactly zero because M vanishes at both ends.
inline std::vector<double> rho_transport_rate(std::span<const double> rho,
                                              const TransformCoeffs& co, const Grid& g,
                                              std::span<const double> kinetics_rho)
{
    const int N = g.N;
    for (double x : rho)
        if (!std::isfinite(x)) throw NonFiniteInput("non-finite rho in transport");
    std::vector<double> G(N + 1, 0.0);
    for (int j = 1; j < N; ++j) {
        const double Mj = co.M_face[j];
        G[j] = Mj * (Mj >= 0.0 ? rho[j - 1] : rho[j]);
    }
    std::vector<double> rate(N);
    for (int i = 0; i < N; ++i)
        rate[i] = -(g.r_face[i + 1] * G[i + 1] - g.r_face[i] * G[i]) /
                      (g.r_center[i] * g.dxi) -
                  co.K_center[i] * rho[i] + kinetics_rho[i];
    return rate;
}

} // namespace ischemic

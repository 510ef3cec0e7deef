#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "constitutive.hpp"
#include "params.hpp"

namespace ischemic {

/// int_R^L r u dr by midpoint quadrature on the xi grid.
inline double integral_I(std::span<const double> u, double R, double L)
{
    const int n = static_cast<int>(u.size());
    const double dxi = 1.0 / n;
    const double width = L - R;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = R + (i + 0.5) * dxi * width;
        sum += r * u[i];
    }
    return sum * dxi * width;
}

struct DecayCheck {
    bool pass = true;
    double worst_ratio = 0.0;   // max over t of I(t) / (I(0) e^{-lambda t})
};

/// Extreme-ischemia oxygen decay: I_w(t) must stay under the exponential
/// envelope I_w(0) e^{-lambda_wm t}, within the scheme-error allowance.
inline DecayCheck check_decay_gamma1(std::span<const double> times,
                                     std::span<const double> I_w, double lambda_wm,
                                     double tol)
{
    DecayCheck c;
    if (times.empty() || I_w[0] == 0.0) return c;   // vacuous
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double envelope = I_w[0] * std::exp(-lambda_wm * times[k]);
        const double ratio = I_w[k] / envelope;
        c.worst_ratio = std::max(c.worst_ratio, ratio);
    }
    c.pass = c.worst_ratio <= 1.0 + tol;
    return c;
}

struct AsymptoticsVerdicts {
    bool f_bounded = true;     // max f <= f_m (1 + tol)
    bool w_bounded = true;     // max w <= max{1, (1-gamma) w_b} (1 + tol)
    bool rho_bounded = true;   // max rho <= 1 + tol
    bool Q_vanishing = true;   // final Q <= q_tol

    bool all() const { return f_bounded && w_bounded && rho_bounded && Q_vanishing; }
};

/// Finite-horizon surrogate for the non-healing limits: the bounds are
/// checked over the final quartile of the run, not at t -> infinity.
inline AsymptoticsVerdicts check_asymptotics_nonhealing(
    std::span<const double> times, std::span<const double> max_f,
    std::span<const double> max_w, std::span<const double> max_rho,
    std::span<const double> Q, const Parameters& prm)
{
    AsymptoticsVerdicts v;
    const std::size_t n = times.size();
    if (n == 0) return v;
    const double t_from = times[0] + 0.75 * (times[n - 1] - times[0]);
    const double tol = prm.asymptotics_tol;
    const double w_cap = std::max(1.0, (1.0 - prm.gamma) * prm.w_b);
    for (std::size_t k = 0; k < n; ++k) {
        if (times[k] < t_from) continue;
        if (max_f[k] > prm.f_m * (1.0 + tol)) v.f_bounded = false;
        if (max_w[k] > w_cap * (1.0 + tol)) v.w_bounded = false;
        if (max_rho[k] > 1.0 + tol) v.rho_bounded = false;
    }
    v.Q_vanishing = Q[n - 1] <= prm.q_tol;
    return v;
}

/// Snapshot of an oracle (or main-path) trajectory.
struct OracleSnapshot {
    double t = 0.0;
    double R = 0.0;
    std::array<std::vector<double>, kNumFields> fields;
};

struct OracleSeries {
    std::vector<OracleSnapshot> snapshots;
    std::vector<double> times;   // all accepted times
    std::vector<double> radius;  // R at those times
};

/// Brute-force reference solver: fully explicit first-order Euler with its
/// own discretization of the same equations, sharing only the constitutive
/// functions with the main path. Fixed dt at a fraction of the explicit
/// stability bound; meant for short horizons on fine grids.
inline OracleSeries oracle_solve(const Parameters& prm, double horizon, int n_cells,
                                 double dt_fraction = 0.25,
                                 double snapshot_interval = 0.1)
{
    const int N = n_cells;
    const double dxi = 1.0 / N;
    const double L = prm.L;

    std::array<std::vector<double>, kNumFields> u;
    for (auto& v : u) v.assign(N, 0.0);
    double R = prm.R0;

    auto at = [&](FieldId id) -> std::vector<double>& { return u[static_cast<int>(id)]; };
    {
        const double width = L - R;
        for (int i = 0; i < N; ++i) {
            const double r = R + (i + 0.5) * dxi * width;
            at(FieldId::W)[i] = 1.0;
            at(FieldId::F)[i] = 1.0;
            at(FieldId::RHO)[i] = 1.0;
            at(FieldId::B)[i] = prm.healthy_init ? 1.0 : initial_b_profile(r, prm);
            at(FieldId::P)[i] = prm.healthy_init ? 0.0 : initial_p_profile(r, prm);
        }
    }

    // explicit stability: diffusion is the binding constraint on fine grids
    const double D_max =
        std::max({prm.D_w, prm.D_p, prm.D_e, prm.D_m, prm.D_f, prm.D_n, prm.D_b});

    OracleSeries series;
    auto snap = [&](double t) {
        OracleSnapshot s;
        s.t = t;
        s.R = R;
        s.fields = u;
        series.snapshots.push_back(std::move(s));
    };

    double t = 0.0;
    series.times.push_back(0.0);
    series.radius.push_back(R);
    snap(0.0);
    double next_snap = snapshot_interval;

    while (t < horizon - 1e-14) {
        const double width = L - R;
        const double h = dxi * width;

        std::vector<double> r_c(N), r_f(N + 1);
        for (int i = 0; i < N; ++i) r_c[i] = R + (i + 0.5) * h;
        for (int j = 0; j <= N; ++j) r_f[j] = R + j * h;

        // pressure integral and velocity at faces by cumulative midpoint
        std::vector<double> P(N);
        for (int i = 0; i < N; ++i) P[i] = pressure(at(FieldId::RHO)[i], prm.beta);
        std::vector<double> cum(N + 1, 0.0);
        for (int i = 0; i < N; ++i) cum[i + 1] = cum[i] + h * r_c[i] * P[i];
        const double Q = cum[N];
        const double denom = L * L + R * R;
        const double Rdot = -2.0 * R * Q / denom;
        std::vector<double> v_f(N + 1);
        for (int j = 0; j <= N; ++j) {
            const double r = r_f[j];
            v_f[j] = ((L * L - r * r) * cum[j] - (r * r + R * R) * (Q - cum[j])) /
                     (r * denom);
        }

        std::vector<double> M(N + 1);
        for (int j = 0; j <= N; ++j)
            M[j] = (Rdot * (j * dxi - 1.0) + v_f[j]) / width;
        M[0] = 0.0;
        M[N] = 0.0;

        double max_speed = 0.0;
        for (int j = 0; j <= N; ++j) max_speed = std::max(max_speed, std::abs(M[j]));

        // ghost values per field at both ends
        const int last = N - 1;
        const double gm = prm.gamma;
        auto robin_ghost = [&](double u_last, double ustar, double X) {
            const double a = 0.5 * (1.0 - gm);
            const double b = gm * L / h;
            return ((b - a) * u_last + (1.0 - gm) * ustar + gm * L * X) / (a + b);
        };

        const auto& w = at(FieldId::W);
        const auto& p = at(FieldId::P);
        const auto& e = at(FieldId::E);
        const auto& m = at(FieldId::M);
        const auto& f = at(FieldId::F);
        const auto& nn = at(FieldId::N);
        const auto& b = at(FieldId::B);
        const auto& rho = at(FieldId::RHO);

        auto target = [](FieldId id) {
            return (id == FieldId::W || id == FieldId::F || id == FieldId::B) ? 1.0 : 0.0;
        };
        const double sp_wound =
            prm.healthy_init ? 0.0 : -prm.k_pb * R / (prm.D_p * prm.R0);
        const double p_ghost_out = robin_ghost(p[last], 0.0, 0.0);
        const double e_ghost_out = robin_ghost(e[last], 0.0, 0.0);
        const double sp_out = (p_ghost_out - p[last]) / h;
        const double se_out = (e_ghost_out - e[last]) / h;

        auto chemo_face_flux = [&](const std::vector<double>& carried,
                                   const std::vector<double>& attract, double chi,
                                   double cap, int j) {
            const double s = (attract[j] - attract[j - 1]) / h;
            const double tau = bounded_taxis(s, prm.k_sg);
            const double rf = 0.5 * (rho[j - 1] + rho[j]);
            const double uup = tau >= 0.0 ? carried[j - 1] : carried[j];
            return chi * rf * uup * heaviside_smooth(1.0 - uup / cap) * tau;
        };

        std::array<std::vector<double>, kNumFields> rate;
        for (auto& v : rate) v.assign(N, 0.0);

        for (FieldId id : all_fields()) {
            const auto& uu = at(id);
            auto& ra = rate[static_cast<int>(id)];

            // comoving advection, upwind, zero end fluxes
            std::vector<double> G(N + 1, 0.0);
            for (int j = 1; j < N; ++j)
                G[j] = M[j] * (M[j] >= 0.0 ? uu[j - 1] : uu[j]);
            for (int i = 0; i < N; ++i) {
                const double K =
                    Rdot / width * ((1.0 - (i + 0.5) * dxi) * width / r_c[i] - 1.0);
                ra[i] = -(r_f[i + 1] * G[i + 1] - r_f[i] * G[i]) / (r_c[i] * dxi) -
                        K * uu[i];
            }

            if (id == FieldId::RHO) continue;

            // diffusion with ghost closures
            const double D = prm.diffusivity(id);
            double X_out = 0.0;   // taxis part of the outer Robin expression
            double taxis_wound = 0.0, taxis_out = 0.0;
            if (id == FieldId::M || id == FieldId::F) {
                const double chi = id == FieldId::M ? prm.chi_m : prm.chi_f;
                const double cap = id == FieldId::M ? prm.m_m : prm.f_m;
                taxis_wound = chi * rho[0] * uu[0] *
                              heaviside_smooth(1.0 - uu[0] / cap) *
                              bounded_taxis(sp_wound, prm.k_sg);
                taxis_out = chi * rho[last] * uu[last] *
                            heaviside_smooth(1.0 - uu[last] / cap) *
                            bounded_taxis(sp_out, prm.k_sg);
                X_out = taxis_out / D;
            } else if (id == FieldId::N) {
                taxis_out = prm.chi_n * rho[last] * nn[last] *
                            heaviside_smooth(1.0 - nn[last] / prm.n_m) *
                            bounded_taxis(se_out, prm.k_sg);
                X_out = taxis_out / D;
            } else if (id == FieldId::B) {
                const double n_ghost_out = robin_ghost(
                    nn[last], 0.0,
                    prm.chi_n / prm.D_n * rho[last] * nn[last] *
                        heaviside_smooth(1.0 - nn[last] / prm.n_m) *
                        bounded_taxis(se_out, prm.k_sg));
                const double sn_out = (n_ghost_out - nn[last]) / h;
                taxis_out = prm.A * prm.D_n * b[last] * bounded_taxis(sn_out, prm.k_sg) -
                            prm.A * prm.chi_n * b[last] * rho[last] * nn[last] *
                                heaviside_smooth(1.0 - nn[last] / prm.n_m) *
                                bounded_taxis(se_out, prm.k_sg);
                X_out = taxis_out / D;
            }

            double ghost_w;   // wound-side ghost
            if (id == FieldId::P)
                ghost_w = uu[0] - h * sp_wound;
            else if (id == FieldId::M || id == FieldId::F)
                ghost_w = uu[0] - h * taxis_wound / D;
            else
                ghost_w = uu[0];
            const double ghost_o = robin_ghost(uu[last], target(id), X_out);

            std::vector<double> Fd(N + 1);
            for (int j = 1; j < N; ++j) Fd[j] = D * (uu[j] - uu[j - 1]) / h;
            Fd[0] = D * (uu[0] - ghost_w) / h;
            Fd[N] = D * (ghost_o - uu[last]) / h;
            for (int i = 0; i < N; ++i)
                ra[i] += (r_f[i + 1] * Fd[i + 1] - r_f[i] * Fd[i]) / (r_c[i] * h);

            // taxis fluxes
            std::vector<double> T(N + 1, 0.0);
            bool has_taxis = false;
            if (id == FieldId::M || id == FieldId::F) {
                const double chi = id == FieldId::M ? prm.chi_m : prm.chi_f;
                const double cap = id == FieldId::M ? prm.m_m : prm.f_m;
                for (int j = 1; j < N; ++j) T[j] = chemo_face_flux(uu, p, chi, cap, j);
                T[0] = taxis_wound;
                T[N] = taxis_out;
                has_taxis = true;
            } else if (id == FieldId::N) {
                for (int j = 1; j < N; ++j)
                    T[j] = chemo_face_flux(uu, e, prm.chi_n, prm.n_m, j);
                T[N] = taxis_out;
                has_taxis = true;
            } else if (id == FieldId::B) {
                for (int j = 1; j < N; ++j) {
                    const double sn = (nn[j] - nn[j - 1]) / h;
                    const double se = (e[j] - e[j - 1]) / h;
                    const double rf = 0.5 * (rho[j - 1] + rho[j]);
                    const double nf = 0.5 * (nn[j - 1] + nn[j]);
                    const double c1 = prm.A * prm.D_n * bounded_taxis(sn, prm.k_sg);
                    const double c2 = -prm.A * prm.chi_n * rf * nf *
                                      heaviside_smooth(1.0 - nf / prm.n_m) *
                                      bounded_taxis(se, prm.k_sg);
                    T[j] = c1 * (c1 >= 0.0 ? uu[j - 1] : uu[j]) +
                           c2 * (c2 >= 0.0 ? uu[j - 1] : uu[j]);
                }
                T[N] = taxis_out;
                has_taxis = true;
            }
            if (has_taxis)
                for (int i = 0; i < N; ++i)
                    ra[i] -= (r_f[i + 1] * T[i + 1] - r_f[i] * T[i]) / (r_c[i] * h);

            for (int j = 0; j <= N; ++j)
                max_speed = std::max(max_speed, std::abs(M[j]));
        }

        // kinetics
        for (int i = 0; i < N; ++i) {
            PointState ps;
            ps.w = w[i];
            ps.p = p[i];
            ps.e = e[i];
            ps.m = m[i];
            ps.f = f[i];
            ps.n = nn[i];
            ps.b = b[i];
            ps.rho = rho[i];
            const Rates kr = kinetics(ps, prm.gamma, prm);
            for (int k = 0; k < kNumFields; ++k) rate[k][i] += kr[k];
        }

        double dt = dt_fraction * std::min({h * h / (2.0 * D_max),
                                            max_speed > 0.0 ? h / (max_speed * width)
                                                            : 1e30,
                                            prm.dt_max});
        // uniform xi CFL: advective bound uses dxi / speed_xi
        dt = std::min(dt, horizon - t);

        for (int k = 0; k < kNumFields; ++k)
            for (int i = 0; i < N; ++i) u[k][i] += dt * rate[k][i];
        R += dt * Rdot;
        t += dt;

        series.times.push_back(t);
        series.radius.push_back(R);
        if (t >= next_snap - 1e-14 || t >= horizon - 1e-14) {
            snap(t);
            next_snap += snapshot_interval;
        }
    }
    return series;
}

struct RunComparison {
    double max_rel_R = 0.0;
    std::array<double, kNumFields> max_rel_field{};
};

/// Sup-norm relative discrepancy between two R(t) curves; the second series
/// is linearly interpolated onto the first one's times.
inline double compare_radius_series(std::span<const double> times_a,
                                    std::span<const double> R_a,
                                    std::span<const double> times_b,
                                    std::span<const double> R_b)
{
    double worst = 0.0;
    std::size_t jb = 0;
    for (std::size_t k = 0; k < times_a.size(); ++k) {
        const double t = times_a[k];
        if (t < times_b.front() || t > times_b.back()) continue;
        while (jb + 1 < times_b.size() && times_b[jb + 1] < t) ++jb;
        const double t0 = times_b[jb], t1 = times_b[jb + 1];
        const double frac = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
        const double rb = R_b[jb] + frac * (R_b[jb + 1] - R_b[jb]);
        worst = std::max(worst, std::abs(R_a[k] - rb) / std::abs(rb));
    }
    return worst;
}

/// Per-field sup-norm relative discrepancy between two snapshots on the
/// shared xi grid; the finer grid is block-averaged onto the coarser one.
inline std::array<double, kNumFields> compare_fields(
    const std::array<std::vector<double>, kNumFields>& a,
    const std::array<std::vector<double>, kNumFields>& b)
{
    std::array<double, kNumFields> out{};
    for (int k = 0; k < kNumFields; ++k) {
        const auto& ua = a[k].size() <= b[k].size() ? a[k] : b[k];
        const auto& ub = a[k].size() <= b[k].size() ? b[k] : a[k];
        const std::size_t ratio = ub.size() / ua.size();
        double scale = 0.0;
        for (double x : ua) scale = std::max(scale, std::abs(x));
        for (double x : ub) scale = std::max(scale, std::abs(x));
        if (scale == 0.0) continue;
        for (std::size_t i = 0; i < ua.size(); ++i) {
            double avg = 0.0;
            for (std::size_t j = 0; j < ratio; ++j) avg += ub[i * ratio + j];
            avg /= static_cast<double>(ratio);
            out[k] = std::max(out[k], std::abs(ua[i] - avg) / scale);
        }
    }
    return out;
}

} // namespace ischemic

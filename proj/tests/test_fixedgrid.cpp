#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "ischemic/grid.hpp"

using namespace ischemic;
using Catch::Approx;

namespace {

Fields uniform_fields(int N, double w, double p, double e, double m, double f,
                      double n, double b, double rho)
{
    Fields u;
    field(u, FieldId::W).assign(N, w);
    field(u, FieldId::P).assign(N, p);
    field(u, FieldId::E).assign(N, e);
    field(u, FieldId::M).assign(N, m);
    field(u, FieldId::F).assign(N, f);
    field(u, FieldId::N).assign(N, n);
    field(u, FieldId::B).assign(N, b);
    field(u, FieldId::RHO).assign(N, rho);
    return u;
}

double weighted_mass(const std::vector<double>& u, const Grid& g)
{
    double s = 0.0;
    for (int i = 0; i < g.N; ++i) s += g.r_center[i] * u[i];
    return s;
}

} // namespace

TEST_CASE("grid construction")
{
    const Grid g = build_grid(100, 8.0 / 3.0, 5.0);
    CHECK(g.r_face.front() == 8.0 / 3.0);
    CHECK(g.r_face.back() == 5.0);
    CHECK(g.h_r == Approx((5.0 - 8.0 / 3.0) / 100));
    for (int j = 0; j < 100; ++j)
        CHECK(g.r_face[j + 1] - g.r_face[j] == Approx(g.h_r).epsilon(1e-12));
    for (int i = 0; i < 100; ++i)
        CHECK(g.r_center[i] == Approx(0.5 * (g.r_face[i] + g.r_face[i + 1])));

    CHECK_THROWS_AS(build_grid(4, 1.0, 5.0), InvalidGeometry);
    CHECK_THROWS_AS(build_grid(64, 5.0, 5.0), InvalidGeometry);
    CHECK_THROWS_AS(build_grid(64, -1.0, 5.0), InvalidGeometry);
}

TEST_CASE("transform coefficient K at the endpoints")
{
    // Rdot = -1, R = 8/3, L = 5
    CHECK(transform_K(1.0, -1.0, 8.0 / 3.0, 5.0) == Approx(3.0 / 7.0));
    CHECK(transform_K(0.0, -1.0, 8.0 / 3.0, 5.0) == Approx(3.0 / 56.0));
}

TEST_CASE("comoving speed vanishes at both ends")
{
    const int N = 64;
    std::vector<double> rho(N, 1.4);
    const Grid g = build_grid(N, 2.0, 5.0);
    const VelocityProfile vp = compute_velocity(rho, 2.0, 5.0, 10.0);
    const TransformCoeffs co = transform_coeffs(g, vp);
    CHECK(std::abs(co.M_face.front()) <= 1e-14);
    CHECK(co.M_face.back() == 0.0);
}

TEST_CASE("outer closure algebra at the ischemia extremes")
{
    const double L = 5.0, h = 0.01, ustar = 1.0, X = 0.3;
    // gamma = 0: Dirichlet, face value pinned to ustar
    const EndClosure d = detail::robin_outer(0.0, L, h, ustar, X);
    CHECK(d.alpha == Approx(-1.0));
    CHECK(d.delta == Approx(2.0 * ustar));
    // gamma = 1: pure flux condition du/dr = X
    const EndClosure f = detail::robin_outer(1.0, L, h, ustar, X);
    CHECK(f.alpha == Approx(1.0));
    CHECK(f.delta == Approx(h * X));
}

TEST_CASE("implicit diffusion conserves mass under sealed boundaries")
{
    Parameters prm;
    prm.gamma = 1.0;
    prm.N = 80;
    const Grid g = build_grid(prm.N, 2.0, prm.L);
    // no taxis anywhere: e gradients vanish for a uniform attractant
    Fields u = uniform_fields(prm.N, 1, 0, 0, 0, 1, 0, 1, 1);
    auto& w = field(u, FieldId::W);
    for (int i = 0; i < prm.N; ++i) w[i] = 1.0 + 0.5 * std::sin(7.0 * i);
    const Closures cl = build_closures(u, g, prm);
    const double before = weighted_mass(w, g);
    std::vector<double> w_new = w;
    implicit_diffusion_update(w_new, FieldId::W, g, prm, cl[static_cast<int>(FieldId::W)],
                              1e-2);
    CHECK(weighted_mass(w_new, g) == Approx(before).epsilon(1e-12));
}

TEST_CASE("implicit diffusion leaves the boundary target invariant")
{
    Parameters prm;
    prm.gamma = 0.0;
    prm.N = 64;
    prm.healthy_init = true;   // no wound-edge growth-factor influx
    const Grid g = build_grid(prm.N, 2.5, prm.L);
    Fields u = uniform_fields(prm.N, 1, 0, 0, 0, 1, 0, 1, 1);
    const Closures cl = build_closures(u, g, prm);
    for (FieldId id : all_fields()) {
        if (id == FieldId::RHO) continue;
        std::vector<double> v = field(u, id);
        const std::vector<double> before = v;
        implicit_diffusion_update(v, id, g, prm, cl[static_cast<int>(id)], 1e-2);
        for (int i = 0; i < prm.N; ++i)
            CHECK(v[i] == Approx(before[i]).margin(1e-12));
    }
}

TEST_CASE("explicit and implicit diffusion agree to first order in dt")
{
    Parameters prm;
    prm.gamma = 0.4;
    prm.N = 50;
    const Grid g = build_grid(prm.N, 2.0, prm.L);
    Fields u = uniform_fields(prm.N, 1, 0, 0, 0, 1, 0, 1, 1);
    auto& w = field(u, FieldId::W);
    for (int i = 0; i < prm.N; ++i) w[i] = 1.0 + 0.3 * std::cos(0.2 * i);
    const Closures cl = build_closures(u, g, prm);
    const FieldClosure& c = cl[static_cast<int>(FieldId::W)];
    const std::vector<double> rate = diffusion_operator(w, FieldId::W, g, prm, c);
    const double dt = 1e-7;
    std::vector<double> w_new = w;
    implicit_diffusion_update(w_new, FieldId::W, g, prm, c, dt);
    for (int i = 0; i < prm.N; ++i)
        CHECK((w_new[i] - w[i]) / dt == Approx(rate[i]).margin(1e-3));
}

TEST_CASE("the matrix field has no diffusion path")
{
    Parameters prm;
    prm.N = 32;
    const Grid g = build_grid(prm.N, 2.0, prm.L);
    Fields u = uniform_fields(prm.N, 1, 0, 0, 0, 1, 0, 1, 1);
    const Closures cl = build_closures(u, g, prm);
    std::vector<double> rho = field(u, FieldId::RHO);
    CHECK_THROWS_AS(
        diffusion_operator(rho, FieldId::RHO, g, prm, cl[static_cast<int>(FieldId::RHO)]),
        NonDiffusingField);
    CHECK_THROWS_AS(implicit_diffusion_update(rho, FieldId::RHO, g, prm,
                                              cl[static_cast<int>(FieldId::RHO)], 1e-3),
                    NonDiffusingField);
}

TEST_CASE("transport rates vanish for a stationary uniform state")
{
    Parameters prm;
    prm.N = 48;
    prm.healthy_init = true;   // no wound-edge growth-factor influx
    const Grid g = build_grid(prm.N, 2.0, prm.L);
    Fields u = uniform_fields(prm.N, 1, 0, 0, 0, 1, 0, 1, 1);
    // rho = 1 gives zero pressure, zero velocity, zero comoving speed
    const VelocityProfile vp = compute_velocity(field(u, FieldId::RHO), 2.0, prm.L, prm.beta);
    const TransformCoeffs co = transform_coeffs(g, vp);
    const Closures cl = build_closures(u, g, prm);
    const TransportRates tr = advection_taxis_operator(u, co, g, prm, cl);
    for (FieldId id : all_fields())
        for (double x : tr.rate[static_cast<int>(id)]) CHECK(std::abs(x) <= 1e-12);
    CHECK(tr.max_speed_xi <= 1e-12);
}

TEST_CASE("advection upwinds in the direction of the comoving speed")
{
    Parameters prm;
    prm.N = 40;
    const Grid g = build_grid(prm.N, 2.0, prm.L);
    Fields u = uniform_fields(prm.N, 0, 0, 0, 0, 0, 0, 0, 1);
    auto& w = field(u, FieldId::W);
    for (int i = 0; i < prm.N; ++i) w[i] = i < prm.N / 2 ? 1.0 : 0.0;
    // hand-built positive comoving speed
    TransformCoeffs co;
    co.Rdot = 0.0;
    co.M_face.assign(prm.N + 1, 0.1);
    co.M_face.front() = 0.0;
    co.M_face.back() = 0.0;
    co.K_center.assign(prm.N, 0.0);
    const Closures cl = build_closures(u, g, prm);
    const TransportRates tr = advection_taxis_operator(u, co, g, prm, cl);
    const auto& rate = tr.rate[static_cast<int>(FieldId::W)];
    // the step moves right: the cell just past the jump fills up
    CHECK(rate[prm.N / 2] > 0.0);
    // left of the jump only the cylindrical spreading term remains
    for (int i = 2; i < prm.N / 2 - 2; ++i) {
        const double geometric =
            -0.1 * (g.r_face[i + 1] - g.r_face[i]) / (g.r_center[i] * g.dxi);
        CHECK(rate[i] == Approx(geometric).epsilon(1e-12));
    }
    // right of the jump there is nothing to transport
    for (int i = prm.N / 2 + 1; i < prm.N - 1; ++i) CHECK(std::abs(rate[i]) <= 1e-14);
    CHECK(tr.max_speed_xi == Approx(0.1));
}

TEST_CASE("chemotaxis moves cells up the attractant gradient")
{
    Parameters prm;
    prm.N = 60;
    prm.gamma = 1.0;   // sealed ends, no Dirichlet interference
    const Grid g = build_grid(prm.N, 2.0, prm.L);
    Fields u = uniform_fields(prm.N, 1, 0, 0, 1, 1, 0, 1, 1);
    auto& p = field(u, FieldId::P);
    for (int i = 0; i < prm.N; ++i) p[i] = static_cast<double>(i) / prm.N;   // increasing
    // zero velocity
    TransformCoeffs co;
    co.M_face.assign(prm.N + 1, 0.0);
    co.K_center.assign(prm.N, 0.0);
    const Closures cl = build_closures(u, g, prm);
    const TransportRates tr = advection_taxis_operator(u, co, g, prm, cl);
    const auto& rate = tr.rate[static_cast<int>(FieldId::M)];
    // macrophages accumulate at the outer (high-p) end and leave the inner end
    CHECK(rate.back() > 0.0);
    CHECK(rate.front() < 0.0);
    // at gamma = 1 the explicit boundary taxis flux is cancelled exactly by
    // the implicit diffusion closure, so the combined step conserves mass
    const double dt = 1e-3;
    std::vector<double> m_new = field(u, FieldId::M);
    double before = 0.0;
    for (int i = 0; i < prm.N; ++i) {
        before += g.r_center[i] * m_new[i];
        m_new[i] += dt * rate[i];
    }
    implicit_diffusion_update(m_new, FieldId::M, g, prm, cl[static_cast<int>(FieldId::M)],
                              dt);
    double after = 0.0;
    for (int i = 0; i < prm.N; ++i) after += g.r_center[i] * m_new[i];
    CHECK(after == Approx(before).epsilon(1e-12));
}

TEST_CASE("matrix transport reduces to kinetics without motion")
{
    Parameters prm;
    prm.N = 30;
    const Grid g = build_grid(prm.N, 2.0, prm.L);
    std::vector<double> rho(prm.N, 1.3);
    std::vector<double> kin(prm.N);
    for (int i = 0; i < prm.N; ++i) kin[i] = 0.01 * i;
    TransformCoeffs co;
    co.Rdot = 0.0;
    co.M_face.assign(prm.N + 1, 0.0);
    co.K_center.assign(prm.N, 0.0);
    const std::vector<double> rate = rho_transport_rate(rho, co, g, kin);
    for (int i = 0; i < prm.N; ++i) CHECK(rate[i] == Approx(kin[i]).margin(1e-14));
}

TEST_CASE("transport operators reject non-finite fields")
{
    Parameters prm;
    prm.N = 16;
    const Grid g = build_grid(prm.N, 2.0, prm.L);
    Fields u = uniform_fields(prm.N, 1, 0, 0, 0, 1, 0, 1, 1);
    field(u, FieldId::E)[3] = std::numeric_limits<double>::quiet_NaN();
    TransformCoeffs co;
    co.M_face.assign(prm.N + 1, 0.0);
    co.K_center.assign(prm.N, 0.0);
    Fields clean = uniform_fields(prm.N, 1, 0, 0, 0, 1, 0, 1, 1);
    const Closures cl = build_closures(clean, g, prm);
    CHECK_THROWS_AS(advection_taxis_operator(u, co, g, prm, cl), NonFiniteInput);
    std::vector<double> bad_rho(prm.N, 1.0);
    bad_rho[0] = std::numeric_limits<double>::infinity();
    std::vector<double> kin(prm.N, 0.0);
    CHECK_THROWS_AS(rho_transport_rate(bad_rho, co, g, kin), NonFiniteInput);
}

TEST_CASE("wound-edge growth-factor gradient scales with the radius")
{
    Parameters prm;
    CHECK(wound_p_gradient(prm.R0, prm) == Approx(-prm.k_pb / prm.D_p));
    CHECK(wound_p_gradient(0.5 * prm.R0, prm) == Approx(-0.5 * prm.k_pb / prm.D_p));
    prm.healthy_init = true;
    CHECK(wound_p_gradient(prm.R0, prm) == 0.0);
}

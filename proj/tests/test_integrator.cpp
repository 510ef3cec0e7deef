#include <catch2/catch_amalgamated.hpp>

#include "ischemic/integrator.hpp"

using namespace ischemic;
using Catch::Approx;

TEST_CASE("initial state layout")
{
    Parameters prm;
    prm.N = 120;
    const WoundState s = init_state(prm);
    CHECK(s.t == 0.0);
    CHECK(s.R == prm.R0);
    for (FieldId id : all_fields())
        REQUIRE(field(s.fields, id).size() == static_cast<std::size_t>(prm.N));
    const auto& b = field(s.fields, FieldId::B);
    const auto& p = field(s.fields, FieldId::P);
    CHECK(b.front() <= 1e-3);          // ramp starts at the wound edge
    CHECK(b.back() == Approx(1.0));    // intact vasculature at the rim
    const Grid g0 = build_grid(prm.N, prm.R0, prm.L);
    CHECK(p.front() == Approx(initial_p_profile(g0.r_center[0], prm)).epsilon(1e-12));
    CHECK(p.back() == 0.0);
    for (double x : field(s.fields, FieldId::W)) CHECK(x == 1.0);
    for (double x : field(s.fields, FieldId::RHO)) CHECK(x == 1.0);
    // rho = 1 everywhere: no pressure, stationary boundary
    CHECK(s.vel.Q == 0.0);
    CHECK(s.vel.Rdot == 0.0);
}

TEST_CASE("healthy initialization is uniform")
{
    Parameters prm;
    prm.healthy_init = true;
    const WoundState s = init_state(prm);
    for (double x : field(s.fields, FieldId::B)) CHECK(x == 1.0);
    for (double x : field(s.fields, FieldId::P)) CHECK(x == 0.0);
}

TEST_CASE("a zero-length step is the identity")
{
    Parameters prm;
    prm.N = 64;
    const WoundState s = init_state(prm);
    const auto [next, rep] = step(s, prm, 0.0);
    CHECK(next.t == s.t);
    CHECK(next.R == s.R);
    for (FieldId id : all_fields()) {
        const auto& a = field(s.fields, id);
        const auto& b = field(next.fields, id);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == Approx(a[i]).margin(1e-14));
    }
    CHECK(rep.dt == 0.0);
}

TEST_CASE("stepping is deterministic")
{
    Parameters prm;
    prm.N = 64;
    WoundState a = init_state(prm);
    WoundState b = init_state(prm);
    for (int k = 0; k < 25; ++k) {
        a = step(a, prm).first;
        b = step(b, prm).first;
    }
    CHECK(a.t == b.t);
    CHECK(a.R == b.R);
    for (FieldId id : all_fields()) {
        const auto& ua = field(a.fields, id);
        const auto& ub = field(b.fields, id);
        for (std::size_t i = 0; i < ua.size(); ++i) CHECK(ua[i] == ub[i]);
    }
}

TEST_CASE("oversized steps are halved until the audit passes")
{
    Parameters prm;
    prm.N = 64;
    prm.gamma = 1.0;
    const WoundState s = init_state(prm);
    // a 10-unit explicit step would drive oxygen negative; the integrator
    // must retry with smaller dt instead of clipping
    const auto [next, rep] = step(s, prm, 10.0);
    CHECK(rep.retries > 0);
    CHECK(rep.dt < 10.0);
    CHECK(rep.audits_pass);
    for (double x : field(next.fields, FieldId::W)) CHECK(x >= -1e-12);
}

TEST_CASE("steps keep the state inside the proved bounds")
{
    Parameters prm;
    prm.N = 100;
    WoundState s = init_state(prm);
    const double n_cap = prm.tip_ceiling() + 1e-12;
    for (int k = 0; k < 200; ++k) {
        const auto [next, rep] = step(s, prm);
        s = next;
        for (FieldId id : all_fields()) {
            CHECK(rep.field_min[static_cast<int>(id)] >= -1e-12);
        }
        CHECK(rep.field_max[static_cast<int>(FieldId::RHO)] <= prm.rho_m + 1e-12);
        CHECK(rep.field_max[static_cast<int>(FieldId::N)] <= n_cap);
        CHECK(rep.R <= prm.R0 + 1e-12);
    }
}

TEST_CASE("boundary-condition residual stays small along a run")
{
    Parameters prm;
    prm.N = 100;
    prm.gamma = 0.5;
    WoundState s = init_state(prm);
    for (int k = 0; k < 100; ++k) {
        const auto [next, rep] = step(s, prm);
        s = next;
        CHECK(rep.bc_residual <= 1e-8);
    }
}

TEST_CASE("runs land exactly on the requested horizon")
{
    Parameters prm;
    prm.N = 64;
    const RunResult rr = run(prm, 1.0);
    CHECK(rr.outcome.kind == Outcome::Kind::Undecided);
    CHECK(rr.final_state.t == Approx(1.0).margin(1e-12));
    REQUIRE(!rr.series.empty());
    CHECK(rr.series.front().t == 0.0);
    CHECK(rr.series.back().t == Approx(1.0).margin(1e-12));
}

TEST_CASE("healthy boundary conditions close the wound")
{
    Parameters prm;   // gamma = 0 defaults
    const RunResult rr = run(prm);
    REQUIRE_FALSE(rr.step_failed);
    REQUIRE(rr.outcome.kind == Outcome::Kind::Healed);
    CHECK(rr.outcome.t_heal > 20.0);
    CHECK(rr.outcome.t_heal < 45.0);
    CHECK(rr.final_state.R <= prm.closure_fraction * prm.R0);
    // the radius history is monotone nonincreasing
    for (std::size_t k = 1; k < rr.series.size(); ++k)
        CHECK(rr.series[k].R <= rr.series[k - 1].R + 1e-12);
}

TEST_CASE("extreme ischemia stalls")
{
    Parameters prm;
    prm.gamma = 1.0;
    const RunResult rr = run(prm);
    REQUIRE_FALSE(rr.step_failed);
    REQUIRE(rr.outcome.kind == Outcome::Kind::Stalled);
    CHECK(rr.outcome.R_inf >= 0.5 * prm.R0);
    CHECK(rr.outcome.t_stall >= 0.0);
    // terminal state is quiet
    CHECK(rr.final_state.vel.Q <= prm.q_tol);
}

TEST_CASE("an already-closed wound classifies immediately")
{
    Parameters prm;
    prm.closure_fraction = 1.0;   // R0 itself counts as closed
    const RunResult rr = run(prm, 5.0);
    CHECK(rr.outcome.kind == Outcome::Kind::Healed);
    CHECK(rr.outcome.t_heal == 0.0);
    CHECK(rr.series.size() == 1);
}

TEST_CASE("non-finite states are reported, not propagated")
{
    Parameters prm;
    prm.N = 32;
    WoundState s = init_state(prm);
    field(s.fields, FieldId::W)[5] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(step(s, prm), NonFiniteInput);
}

TEST_CASE("invalid parameters are rejected before integration")
{
    Parameters prm;
    prm.gamma = 1.5;
    CHECK_THROWS_AS(init_state(prm), ConfigError);
    Parameters prm2;
    prm2.N = 4;
    CHECK_THROWS_AS(init_state(prm2), ConfigError);
}

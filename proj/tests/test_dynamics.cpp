#include "kr/dynamics.hpp"
#include "kr/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace kr;

TEST_CASE("observables")
{
    RotorState psi = RotorState::Zero(5);
    psi(2) = std::sqrt(0.5);
    psi(3) = cplx(0, std::sqrt(0.5));
    const Observables o = observables(psi);
    CHECK(o.l2 == doctest::Approx(0.5 * 6 + 0.5 * 12));
    CHECK(o.populations.sum() == doctest::Approx(1.0));
}

TEST_CASE("thermal state")
{
    const LatticeSpec spec{201, 3};
    const RotorState psi = thermal_state(0.17, spec);
    CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(psi(0)) > std::abs(psi(1)));
    CHECK(observables(psi).l2 == doctest::Approx(1.22).epsilon(0.01));
    CHECK_THROWS_AS(thermal_state(-1.0, spec), Error);
    try {
        thermal_state(1e-5, LatticeSpec{20, 3});
        FAIL("expected a truncation error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::truncation);
        CHECK(exit_code(e.kind()) == 4);
    }
}

TEST_CASE("protocols are periodic in alpha")
{
    for (const Protocol& p : {Protocol::fig1_circle(), Protocol::fig3_family(0.21)})
        for (double a : {0.0, 0.7, 3.3}) {
            const PulseVector x = p.pulses(a), y = p.pulses(a + 2 * std::numbers::pi);
            CHECK(std::abs(x.P1 - y.P1) + std::abs(x.P2 - y.P2) + std::abs(x.P3 - y.P3) + std::abs(x.P4 - y.P4) <
                  1e-14);
        }
    const Protocol p = Protocol::fig1_circle(40);
    CHECK(p.alpha_at(40) == doctest::Approx(2 * std::numbers::pi));
    CHECK(p.pulses(p.alpha_at(0)) == p.pulses(p.alpha_at(40)));
    CHECK(Protocol::from_name("fig1_circle").kind == Protocol::Kind::fig1_circle);
    CHECK_THROWS_AS(Protocol::from_name("nope"), Error);
}

TEST_CASE("zero pulses give a constant trace")
{
    const LatticeSpec spec{60, 3};
    Protocol p = Protocol::constant({});
    p.n_gamma = 8;
    const auto tr = evolve(thermal_state(0.2, spec), p, spec);
    REQUIRE(tr.rows.size() == 9);
    for (const auto& r : tr.rows)
        CHECK(r.l2 == doctest::Approx(tr.rows[0].l2).epsilon(1e-12));
    CHECK(tr.max_norm_drift < 1e-12);
}

TEST_CASE("evolution conserves the norm and repeats cycles exactly")
{
    const LatticeSpec spec{90, 3};
    Protocol p = Protocol::fig1_circle(10);
    const RotorState psi = thermal_state(0.3, spec);
    const auto one = evolve(psi, p, spec);
    CHECK(one.max_norm_drift < 1e-10);
    p.cycles = 2;
    const auto two = evolve(psi, p, spec);
    REQUIRE(two.rows.size() == 21);
    for (int n = 0; n <= 10; ++n)
        CHECK(two.rows[n].l2 == one.rows[n].l2);
}

TEST_CASE("edge state at the anomalous point")
{
    const LatticeSpec spec{150, 3};
    const PulseVector ads{1.6, 0.0, 0.0, 6.0};
    const EdgeState es = edge_state(ads, spec, 1);
    CHECK(es.at_l0);
    CHECK(es.info.weight_l0 > 0.5);
    CHECK(es.state.norm() == doctest::Approx(1.0));
    // free rotor: all bands sit at the same quasienergy, so gap 1 is closed
    try {
        edge_state(PulseVector{0.0, 0.0, 0.0, 0.0}, spec, 1);
        FAIL("expected no edge state");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::not_topological);
    }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bae/errors.hpp"
#include "bae/model.hpp"

using namespace bae;

namespace {

SystemParams lab() {
    SystemParams p;
    p.omega0 = 1.77e15;
    p.cavity_length = 1e-3;
    p.gamma = 1e5;
    p.omega_m = 2 * pi * 1e6;
    p.gamma_m = 10;
    p.mass = 1e-12;
    p.n_th = 5;
    return p;
}

}  // namespace

TEST_CASE("zero-point displacement and coupling") {
    SystemParams p = lab();
    DerivedParams d = derive(p, {});
    // sqrt(hbar/(2 m wm)) evaluated by hand
    CHECK(d.x_z == doctest::Approx(2.896897629542263e-15).epsilon(1e-14));
    CHECK(d.g == doctest::Approx(d.x_z * p.omega0 / p.cavity_length).epsilon(1e-15));
}

TEST_CASE("empty pump gives an all-zero derived block") {
    DerivedParams d = derive(lab(), {});
    CHECK(d.d_plus == cplx(0));
    CHECK(d.d_minus == cplx(0));
    CHECK(d.strength(0) == 0);
    CHECK(d.strength(1e5) == 0);
}

TEST_CASE("intracavity amplitudes") {
    SystemParams p = lab();
    PumpConfig pump;
    pump.amp_plus = cplx(3, 1);
    pump.amp_minus = cplx(-2, 0.5);
    pump.delta = 17;
    DerivedParams d = derive(p, pump);
    const double wp = p.omega_m + 17;
    cplx dp = std::sqrt(2 * p.gamma) * pump.amp_plus / cplx(p.gamma, -wp);
    cplx dm = std::sqrt(2 * p.gamma) * pump.amp_minus / cplx(p.gamma, wp);
    CHECK(std::abs(d.d_plus - dp) < 1e-15 * std::abs(dp));
    CHECK(std::abs(d.d_minus - dm) < 1e-15 * std::abs(dm));
    CHECK(d.omega_p == doctest::Approx(wp));
    CHECK(std::tan(d.quad_phase_beta) == doctest::Approx(p.omega_m / p.gamma));
}

TEST_CASE("strength falls off as a Lorentzian") {
    SystemParams p = lab();
    DerivedParams d = derive(p, pump_for_strength(p, 2e5));
    CHECK(d.strength(0) == doctest::Approx(2e5).epsilon(1e-12));
    CHECK(d.strength(p.gamma) == doctest::Approx(1e5).epsilon(1e-12));
}

TEST_CASE("pump_for_strength honours imbalance and phases") {
    SystemParams p = lab();
    PumpConfig pump = pump_for_strength(p, 1e4, 0.2, 0.3, -0.4);
    CHECK(pump.imbalance() == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(pump.phi_r() == doctest::Approx(0.3));
    CHECK(pump.phi_s() == doctest::Approx(-0.4));
    CHECK_FALSE(pump.is_symmetric());
    CHECK(derive(p, pump).strength(0) == doctest::Approx(1e4).epsilon(1e-12));
    CHECK(pump_for_strength(p, 1e4).is_symmetric());
    CHECK_THROWS_AS(pump_for_strength(p, -1), ValidationError);
    CHECK_THROWS_AS(pump_for_strength(p, 1, 1.5), ValidationError);
}

TEST_CASE("validation") {
    SystemParams p = lab();
    p.mass = 0;
    CHECK_THROWS_AS(derive(p, {}), ValidationError);
    p = lab();
    p.gamma = -1;
    CHECK_THROWS_AS(derive(p, {}), ValidationError);
    p = lab();
    p.gamma_m = std::nan("");
    CHECK_THROWS_AS(validate(p), ValidationError);
    p = lab();
    p.gamma_m = 0;
    CHECK_NOTHROW(validate(p));
}

TEST_CASE("regime warnings") {
    SystemParams p = lab();
    CHECK(validate_regime(p).empty());
    p.omega_m = 2 * p.gamma;
    auto w = validate_regime(p);
    REQUIRE(w.size() == 1);
    CHECK(w[0].find("sideband") != std::string::npos);
    p = lab();
    p.gamma_m = p.gamma / 2;
    CHECK(validate_regime(p).size() == 1);
}

TEST_CASE("lo tones") {
    auto [a, b] = lo_tones({});
    CHECK(std::abs(a) == doctest::Approx(std::sqrt(0.5)));
    CHECK(std::abs(b) == doctest::Approx(std::sqrt(0.5)));
    PumpConfig pump;
    pump.amp_plus = cplx(0, 3);
    pump.amp_minus = 4;
    auto [c, e] = lo_tones(pump);
    CHECK(std::abs(c - cplx(0, 0.6)) < 1e-15);
    CHECK(std::abs(e - 0.8) < 1e-15);
}

TEST_CASE("presets") {
    Preset f = preset("fast-test");
    DerivedParams d = derive(f.params, f.pump);
    CHECK(d.x_z == doctest::Approx(1).epsilon(1e-14));
    CHECK(d.g == doctest::Approx(1e-3).epsilon(1e-14));
    CHECK(d.strength(0) == doctest::Approx(1).epsilon(1e-12));

    Preset pl = preset("paper-like");
    CHECK(pl.params.gamma == 1e6);
    CHECK(pl.params.omega_m == 3e7);
    CHECK(pl.params.gamma_m == 24);
    CHECK(derive(pl.params, pl.pump).strength(0) == doctest::Approx(2e5).epsilon(1e-12));
    CHECK_THROWS_AS(preset("nope"), ValidationError);
    CHECK(preset_names().size() == 2);
}

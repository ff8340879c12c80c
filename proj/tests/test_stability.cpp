#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bae/errors.hpp"
#include "bae/linresp.hpp"
#include "bae/stability.hpp"

using namespace bae;

TEST_CASE("negative damping at the quoted operating point") {
    // 4e10 * 1e6 / (3 * 9e14)
    CHECK(negative_damping(2e5, 1e6, 3e7) == doctest::Approx(14.814814814814815).epsilon(1e-15));
    Preset pl = preset("paper-like");
    DerivedParams d = derive(pl.params, pl.pump);
    CHECK(negative_damping(d, pl.params) == doctest::Approx(14.814814814814815).epsilon(1e-12));
}

TEST_CASE("threshold") {
    Preset pl = preset("paper-like");
    DerivedParams d = derive(pl.params, pl.pump);
    StabilityReport r = stability_report(pl.params, pl.pump, d);
    CHECK(r.g_threshold == doctest::Approx(254558.44122715711).epsilon(1e-14));
    CHECK(negative_damping(r.g_threshold, 1e6, 3e7) == doctest::Approx(24).epsilon(1e-12));
    CHECK(r.stable);
    CHECK(r.net_damping == doctest::Approx(24 - 14.814814814814815).epsilon(1e-9));
    CHECK(r.g_threshold_with_imbalance == doctest::Approx(r.g_threshold).epsilon(1e-9));

    SystemParams p2 = pl.params;
    p2.gamma_m *= 2;
    StabilityReport r2 = stability_report(p2, pl.pump, derive(p2, pl.pump));
    CHECK(r2.g_threshold / r.g_threshold == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    SystemParams p0 = pl.params;
    p0.gamma_m = 0;
    for (double G : {1.0, 1e3, 1e6}) {
        PumpConfig q = pump_for_strength(p0, G);
        CHECK_FALSE(stability_report(p0, q, derive(p0, q)).stable);
    }
}

TEST_CASE("asymmetric tones") {
    SystemParams p = preset("fast-test").params;
    PumpConfig pump = pump_for_strength(p, 2.0, 0.3);
    DerivedParams d = derive(p, pump);
    // (4/3) g^4 |D+|^2 |D-|^2/(gamma wm^2) = G^2 gamma (1 - eps^2)/(3 wm^2)
    CHECK(negative_damping(d, p) == doctest::Approx(4.0 * 0.91 / 1200).epsilon(1e-12));
    StabilityReport r = stability_report(p, pump, d);
    CHECK(r.net_damping ==
          doctest::Approx(p.gamma_m + 0.3 * 2.0 - 4.0 * 0.91 / 1200).epsilon(1e-12));
    // the imbalance threshold solves gamma_m + eps G = gamma_m_add(G)
    double g = r.g_threshold_with_imbalance;
    CHECK(p.gamma_m + 0.3 * g == doctest::Approx(g * g * 0.91 / 1200).epsilon(1e-10));
}

TEST_CASE("second harmonic of the beat") {
    SystemParams p = preset("fast-test").params;
    p.gamma_m = 0;
    PumpConfig pump = pump_for_strength(p, 1.0, 0, 0.2, 0.5);
    DerivedParams d = derive(p, pump);
    SecondHarmonic s = second_harmonic(d, p);
    cplx x = d.d_plus * std::conj(d.d_minus);
    // off-resonant drive at 2 wm: -gX/wm + gX/(3 wm)
    CHECK(std::abs(s.b_minus2 + d.g * x / p.omega_m) < 1e-15);
    CHECK(std::abs(s.b_plus2 - d.g * std::conj(x) / (3 * p.omega_m)) < 1e-15);
    CHECK(std::abs(s.q2 + 2.0 / 3.0 * d.g * x / p.omega_m) < 1e-14 * std::abs(d.g * x / p.omega_m));
}

TEST_CASE("modified amplitudes") {
    SystemParams p = preset("fast-test").params;
    PumpConfig pump = pump_for_strength(p, 4.0);
    DerivedParams d = derive(p, pump);
    auto [tp, tm] = modified_amplitudes(d, p);
    double k = 2 * d.g * d.g * std::norm(d.d_minus) / (3 * 400.0);
    CHECK(std::abs(tp - d.d_plus * (1 + k)) < 1e-14 * std::abs(d.d_plus));
    CHECK(std::abs(tm - d.d_minus * (1 - k)) < 1e-14 * std::abs(d.d_minus));
    PumpConfig big = pump_for_strength(p, 1e3);
    CHECK_THROWS_AS(modified_amplitudes(derive(p, big), p), PerturbationError);
    CHECK_FALSE(stability_report(p, big, derive(p, big)).perturbative);
}

TEST_CASE("compensation drive cancels the ponderomotive beat") {
    Preset pl = preset("paper-like");
    DerivedParams d = derive(pl.params, pl.pump);
    cplx f = ponderomotive_force(d, pl.params);
    CHECK(std::abs(f) == doctest::Approx(2 * hbar * pl.params.omega0 / pl.params.cavity_length *
                                         std::abs(d.d_plus) * std::abs(d.d_minus)));
    CHECK(std::abs(compensation_force(d, pl.params) + f) == 0);
    DerivedParams d0 = derive(pl.params, {});
    CHECK(std::abs(ponderomotive_force(d0, pl.params)) == 0);
}

TEST_CASE("imbalance that offsets the negative damping") {
    SystemParams p = preset("fast-test").params;
    p.gamma_m = 0;
    PumpConfig pump = pump_for_strength(p, 2.0);
    DerivedParams d = derive(p, pump);
    Compensation c = compensation_imbalance(p, d, 2.0);
    CHECK(c.epsilon > 0);
    DerivedParams dc = derive(p, c.pump);
    CHECK(dc.strength(0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(opt_damping(0, dc).real() == doctest::Approx(negative_damping(dc, p)).epsilon(1e-9));
    CHECK(c.residual > 0);
    CHECK(compensation_imbalance(p, d, 0).epsilon == 0);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bae/errors.hpp"
#include "bae/linresp.hpp"

using namespace bae;

namespace {

SystemParams fast() { return preset("fast-test").params; }

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("reflection phase is unimodular") {
    for (double w : {-3.0, 0.0, 0.2, 50.0}) {
        cplx r = reflection_phase(w, 1.0);
        CHECK(std::abs(r) == doctest::Approx(1));
    }
    CHECK(std::abs(reflection_phase(0.0, 1.0) - 1.0) < 1e-15);
    CHECK(std::abs(reflection_phase(1.0, 1.0) - cplx(0, 1)) < 1e-15);
}

TEST_CASE("symmetric pump: shot noise passes through untouched") {
    SystemParams p = fast();
    PumpConfig pump = pump_for_strength(p, 3.0, 0, 0.4, -1.1);
    DerivedParams d = derive(p, pump);
    for (double nu : {-0.5, -0.003, 0.01, 0.9}) {
        OutputTransfer o = output_transfer(nu, p, pump, d);
        CHECK(std::abs(o.gamma_opt) < 1e-15);
        CHECK(rel(o.c_shot, reflection_phase(nu, p.gamma)) < 1e-12);
        CHECK(o.c_shot_conj == cplx(0));
        // |c_signal|^2 = 2 G/(gm^2 + nu^2)
        double expect = 2 * d.strength(nu) / (p.gamma_m * p.gamma_m + nu * nu);
        CHECK(std::norm(o.c_signal) == doctest::Approx(expect).epsilon(1e-13));
        CHECK(back_action_residual(nu, p, pump, d) < 1e-12);
    }
}

TEST_CASE("optical damping for unequal tones") {
    SystemParams p = fast();
    PumpConfig pump = pump_for_strength(p, 2.0, 0.25);
    DerivedParams d = derive(p, pump);
    // g^2 (|D-|^2 - |D+|^2)/(gamma - i nu), with |D-|^2 - |D+|^2 = eps N
    const double nu = 0.3;
    cplx want = 0.25 * 2.0 * p.gamma / cplx(p.gamma, -nu);
    CHECK(rel(opt_damping(nu, d), want) < 1e-13);
    OutputTransfer o = output_transfer(nu, p, pump, d);
    cplx den = p.gamma_m + want - cplx(0, nu);
    CHECK(back_action_residual(nu, p, pump, d) ==
          doctest::Approx(2 * std::abs(want.real()) / std::abs(den)).epsilon(1e-12));
    CHECK(std::abs(o.c_shot) < 1.0);
}

TEST_CASE("closed form agrees with the linear-system oracle") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0, 1);
    double worst = 0;
    for (int draw = 0; draw < 20; ++draw) {
        SystemParams p = fast();
        p.gamma = 0.5 + u(rng);
        p.omega_m = 20 + 30 * u(rng);
        p.gamma_m = 0.05 * u(rng);
        p.n_th = 10 * u(rng);
        PumpConfig pump = pump_for_strength(p, 5 * u(rng), 0.6 * (u(rng) - 0.5), 3 * u(rng), 3 * u(rng));
        pump.delta = 0.1 * (u(rng) - 0.5);
        DerivedParams d = derive(p, pump);
        for (double nu : {-0.7, -0.02, 0.013, 0.4}) {
            TransferMatrix cf = closed_form_matrix(nu, p, d);
            TransferMatrix orc = oracle_transfer(nu, p, d, false).t;
            worst = std::max(worst, (cf - orc).cwiseAbs().maxCoeff() / orc.cwiseAbs().maxCoeff());
            OutputTransfer a = output_transfer(nu, p, pump, d);
            OutputTransfer b = oracle_solve(nu, p, pump, d, false);
            CHECK(rel(a.c_shot, b.c_shot) < 1e-10);
            CHECK(std::abs(b.c_shot_conj) < 1e-10);
            CHECK(rel(a.c_signal, b.c_signal) < 1e-10);
            CHECK(rel(a.gamma_opt, b.gamma_opt) < 1e-9);
        }
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("mechanical response") {
    SystemParams p = fast();
    PumpConfig pump = pump_for_strength(p, 1.0, 0.1);
    DerivedParams d = derive(p, pump);
    MechResponse m = mech_response(0.02, p, pump, d);
    TransferMatrix t = oracle_transfer(0.02, p, d, false).t;
    CHECK(rel(m.chi_eff, t(out_b, in_f)) < 1e-12);
    CHECK(rel(m.ba_coeff_ain, t(out_b, in_a)) < 1e-12);
    CHECK(rel(m.ba_coeff_ain_conj, t(out_b, in_ac)) < 1e-12);
}

TEST_CASE("exact pole is reported") {
    SystemParams p = fast();
    p.gamma_m = 0;
    PumpConfig pump = pump_for_strength(p, 1.0);
    DerivedParams d = derive(p, pump);
    CHECK_THROWS_AS(output_transfer(0, p, pump, d), PoleError);
    CHECK_THROWS_AS(oracle_transfer(0, p, d, false), PoleError);
    CHECK_NOTHROW(output_transfer(1e-3, p, pump, d));
}

TEST_CASE("2 wm channels") {
    SystemParams p = fast();
    PumpConfig pump = pump_for_strength(p, 0.5);
    DerivedParams d = derive(p, pump);
    TransferMatrix t8 = oracle_transfer(0.05, p, d, true).t;
    TransferMatrix t4 = oracle_transfer(0.05, p, d, false).t;
    // RWA part survives; the extra channels perturb the carrier rows at order G gamma/wm^2
    CHECK(rel(t8(out_b, in_f), t4(out_b, in_f)) < 0.05);
    CHECK(std::abs(t8(out_b, in_a_up)) > 0);
    CHECK(std::abs(t4(out_b, in_a_up)) == 0);
    // with the pump off the side channels just reflect
    DerivedParams d0 = derive(p, {});
    TransferMatrix e = oracle_transfer(0.05, p, d0, true).t;
    CHECK(rel(e(out_a_up, in_a_up), reflection_phase(0.05 + 40, p.gamma)) < 1e-14);
    CHECK(rel(e(out_a_dn, in_a_dn), reflection_phase(0.05 - 40, p.gamma)) < 1e-14);
}

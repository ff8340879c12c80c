#pragma once

#include "bae/model.hpp"

namespace bae {

// Forced 2 wm mechanical motion, in units of x_z:
// x(t)/x_z ~ q2 e^{-2i wm t} + conj(q2) e^{2i wm t}.
struct SecondHarmonic {
    cplx b_minus2{};  // b component e^{-2i wm t} (lab frame)
    cplx b_plus2{};   // b component e^{+2i wm t}
    cplx q2{};        // b_minus2 + conj(b_plus2)
};

SecondHarmonic second_harmonic(const DerivedParams& d, const SystemParams& p);

// (D~+, D~-) = D+-(1 +- (2 g^2/(3 wm^2)) |D-+|^2)
std::pair<cplx, cplx> modified_amplitudes(const DerivedParams& d, const SystemParams& p);

// G^2 gamma/(3 wm^2)
double negative_damping(double strength, double gamma, double omega_m);
// (4/3) g^4 |D+|^2 |D-|^2/(gamma wm^2); equals the line above for symmetric tones
double negative_damping(const DerivedParams& d, const SystemParams& p);

struct StabilityReport {
    double gamma_m_add = 0;
    double net_damping = 0;
    bool stable = false;
    double g_threshold = 0;                 // wm sqrt(3 gamma_m/gamma)
    double g_threshold_with_imbalance = 0;  // root of gamma_m + eps G = G^2 gamma (1-eps^2)/(3 wm^2)
    SecondHarmonic second{};
    cplx d_tilde_plus{};
    cplx d_tilde_minus{};
    bool perturbative = true;
    cplx compensation_force{};  // complex amplitude, F(t) = Re(F e^{-2i wp t})
};

StabilityReport stability_report(const SystemParams& p, const PumpConfig& pump,
                                 const DerivedParams& d);

// Ponderomotive 2 wm force: F(t) = Re(F e^{-2i wp t}), F = (2 hbar omega0/L) D+ D-^*
cplx ponderomotive_force(const DerivedParams& d, const SystemParams& p);
// Classical drive that cancels it.
cplx compensation_force(const DerivedParams& d, const SystemParams& p);

struct Compensation {
    double epsilon = 0;
    double residual = 0;  // back_action_residual at residual_freq with the compensated pump
    double residual_freq = 0;
    PumpConfig pump;
};

// Imbalance eps with Re Gamma(balance_freq) = gamma_m_add at fixed G(0) = target_g.
Compensation compensation_imbalance(const SystemParams& p, const DerivedParams& d, double target_g,
                                    double balance_freq = 0, double residual_freq = -1);

}  // namespace bae

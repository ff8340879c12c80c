#include "bae/stability.hpp"

#include <cmath>
#include <limits>

#include "bae/errors.hpp"
#include "bae/linresp.hpp"

namespace bae {

namespace {
const cplx I1(0, 1);
}

SecondHarmonic second_harmonic(const DerivedParams& d, const SystemParams& p) {
    SecondHarmonic s;
    const cplx ig = I1 * d.g;
    const double wp = d.omega_p;
    // b' = (-gamma_m - i wm) b + i g |c|^2, beat term D+ D-^* e^{-2i wp t}
    s.b_minus2 = ig * d.d_plus * std::conj(d.d_minus) / cplx(p.gamma_m, p.omega_m - 2 * wp);
    s.b_plus2 = ig * std::conj(d.d_plus) * d.d_minus / cplx(p.gamma_m, p.omega_m + 2 * wp);
    s.q2 = s.b_minus2 + std::conj(s.b_plus2);
    return s;
}

std::pair<cplx, cplx> modified_amplitudes(const DerivedParams& d, const SystemParams& p) {
    const double k = 2 * d.g * d.g / (3 * p.omega_m * p.omega_m);
    const double kp = k * std::norm(d.d_minus), km = k * std::norm(d.d_plus);
    if (kp > 0.5 || km > 0.5)
        throw PerturbationError("modified_amplitudes: correction exceeds 0.5, perturbation invalid");
    return {d.d_plus * (1 + kp), d.d_minus * (1 - km)};
}

double negative_damping(double strength, double gamma, double omega_m) {
    return strength * strength * gamma / (3 * omega_m * omega_m);
}

double negative_damping(const DerivedParams& d, const SystemParams& p) {
    const double g2 = d.g * d.g;
    return 4.0 / 3.0 * g2 * g2 * std::norm(d.d_plus) * std::norm(d.d_minus) /
           (p.gamma * p.omega_m * p.omega_m);
}

cplx ponderomotive_force(const DerivedParams& d, const SystemParams& p) {
    return 2 * hbar * p.omega0 / p.cavity_length * d.d_plus * std::conj(d.d_minus);
}

cplx compensation_force(const DerivedParams& d, const SystemParams& p) {
    return -ponderomotive_force(d, p);
}

StabilityReport stability_report(const SystemParams& p, const PumpConfig&, const DerivedParams& d) {
    StabilityReport r;
    r.gamma_m_add = negative_damping(d, p);
    r.net_damping = p.gamma_m - r.gamma_m_add + opt_damping(0, d).real();
    r.stable = r.net_damping > 0;
    r.g_threshold = p.omega_m * std::sqrt(3 * p.gamma_m / p.gamma);
    const double n = d.photon_sum();
    const double eps = n > 0 ? (std::norm(d.d_minus) - std::norm(d.d_plus)) / n : 0;
    // a G^2 - eps G - gamma_m = 0
    const double a = p.gamma * (1 - eps * eps) / (3 * p.omega_m * p.omega_m);
    r.g_threshold_with_imbalance =
        a > 0 ? (eps + std::sqrt(eps * eps + 4 * a * p.gamma_m)) / (2 * a)
              : std::numeric_limits<double>::infinity();
    r.second = second_harmonic(d, p);
    try {
        auto [tp, tm] = modified_amplitudes(d, p);
        r.d_tilde_plus = tp;
        r.d_tilde_minus = tm;
    } catch (const PerturbationError&) {
        r.perturbative = false;
        r.d_tilde_plus = d.d_plus;
        r.d_tilde_minus = d.d_minus;
    }
    r.compensation_force = compensation_force(d, p);
    return r;
}

Compensation compensation_imbalance(const SystemParams& p, const DerivedParams& d, double target_g,
                                    double balance_freq, double residual_freq) {
    if (!(target_g >= 0)) throw ValidationError("target G must be >= 0");
    const double n = target_g * p.gamma / (d.g * d.g);
    const double phase_p = std::arg(d.d_plus), phase_m = std::arg(d.d_minus);
    auto shaped = [&](double eps) {
        DerivedParams dd = d;
        dd.d_plus = std::polar(std::sqrt(0.5 * n * (1 - eps)), phase_p);
        dd.d_minus = std::polar(std::sqrt(0.5 * n * (1 + eps)), phase_m);
        return dd;
    };
    auto excess = [&](double eps) {
        DerivedParams dd = shaped(eps);
        return opt_damping(balance_freq, dd).real() - negative_damping(dd, p);
    };

    Compensation c;
    c.residual_freq = residual_freq >= 0 ? residual_freq : p.gamma_m > 0 ? p.gamma_m : 0.01 * p.gamma;
    if (target_g == 0) {
        c.epsilon = 0;
    } else {
        double lo = 0, hi = 0.5;
        double flo = excess(lo), fhi = excess(hi);
        if (!(flo <= 0 && fhi > 0))
            throw RootFindError("compensation_imbalance: no imbalance in (0, 0.5) balances the "
                                "negative damping");
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
            double mid = 0.5 * (lo + hi);
            (excess(mid) > 0 ? hi : lo) = mid;
        }
        c.epsilon = 0.5 * (lo + hi);
    }

    // pump amplitudes giving the shaped intracavity tones
    DerivedParams dd = shaped(c.epsilon);
    const double s = std::sqrt(2 * p.gamma);
    c.pump.amp_plus = dd.d_plus * cplx(p.gamma, -d.omega_p) / s;
    c.pump.amp_minus = dd.d_minus * cplx(p.gamma, d.omega_p) / s;
    c.pump.delta = d.omega_p - p.omega_m;
    c.residual = back_action_residual(c.residual_freq, p, c.pump, derive(p, c.pump));
    return c;
}

}  // namespace bae

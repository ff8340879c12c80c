#pragma once

#include <complex>
#include <string>
#include <vector>

namespace bae {

using cplx = std::complex<double>;

inline constexpr double hbar = 1.054571817e-34;  // J s
inline constexpr double pi = 3.14159265358979323846;

// Cavity + single mechanical mode + bath. SI units, angular rates.
struct SystemParams {
    double omega0 = 0;        // optical carrier
    double cavity_length = 0;
    double gamma = 0;         // cavity HWHM
    double omega_m = 0;
    double gamma_m = 0;       // mechanical amplitude relaxation
    double mass = 0;
    double n_th = 0;
};

// Two pump tones at omega0 +- (omega_m + delta). |A|^2 is photon flux.
struct PumpConfig {
    cplx amp_plus{};   // blue tone
    cplx amp_minus{};  // red tone
    double delta = 0;
    double theta = 0;  // LO delay, measured from phi_r (see README)

    double phi_plus() const { return std::arg(amp_plus); }
    double phi_minus() const { return std::arg(amp_minus); }
    double phi_r() const { return 0.5 * (phi_minus() - phi_plus()); }
    double phi_s() const { return 0.5 * (phi_minus() + phi_plus()); }
    bool is_symmetric(double rel_tol = 1e-9) const;
    // (|A-|^2 - |A+|^2)/(|A-|^2 + |A+|^2), 0 for an empty pump
    double imbalance() const;
};

struct DerivedParams {
    double x_z = 0;
    double g = 0;
    cplx d_plus{};
    cplx d_minus{};
    double quad_phase_beta = 0;  // e^{2i beta} = (gamma + i wm)/(gamma - i wm)
    double gamma = 0;            // copied so G(Omega) is self-contained
    double omega_p = 0;          // omega_m + delta

    double photon_sum() const { return std::norm(d_plus) + std::norm(d_minus); }
    // G(Omega) = g^2 gamma (|D+|^2 + |D-|^2)/(gamma^2 + Omega^2)
    double strength(double omega) const {
        return g * g * gamma * photon_sum() / (gamma * gamma + omega * omega);
    }
};

void validate(const SystemParams& p);

DerivedParams derive(const SystemParams& p, const PumpConfig& pump);

struct RegimeThresholds {
    double sideband_factor = 10;  // want omega_m >= f*gamma
    double damping_factor = 10;   // want gamma >= f*gamma_m
};

std::vector<std::string> validate_regime(const SystemParams& p,
                                         const RegimeThresholds& t = {});

// Pump with G(0) = strength and imbalance eps, tone phases from phi_r/phi_s.
PumpConfig pump_for_strength(const SystemParams& p, double strength, double eps = 0,
                             double phi_r = 0, double phi_s = 0);

// LO tone weights (A+, A-)/sqrt(|A+|^2+|A-|^2); equal unit tones if the pump is empty.
std::pair<cplx, cplx> lo_tones(const PumpConfig& pump);

struct Preset {
    SystemParams params;
    PumpConfig pump;
    double strength = 0;  // G(0) of the symmetric preset pump
    double t_f = 0;
};

// "paper-like" or "fast-test"
Preset preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace bae

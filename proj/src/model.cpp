#include "bae/model.hpp"

#include <cmath>
#include <sstream>

#include "bae/errors.hpp"

namespace bae {

bool PumpConfig::is_symmetric(double rel_tol) const {
    double a = std::abs(amp_plus), b = std::abs(amp_minus);
    double scale = std::max(a, b);
    if (scale == 0) return true;
    return std::abs(a - b) <= rel_tol * scale;
}

double PumpConfig::imbalance() const {
    double np = std::norm(amp_plus), nm = std::norm(amp_minus);
    if (np + nm == 0) return 0;
    return (nm - np) / (nm + np);
}

void validate(const SystemParams& p) {
    auto need_pos = [](double v, const char* name) {
        if (!(v > 0) || !std::isfinite(v)) {
            std::ostringstream os;
            os << name << " must be positive and finite (got " << v << ")";
            throw ValidationError(os.str());
        }
    };
    need_pos(p.omega0, "omega0");
    need_pos(p.cavity_length, "cavity_length");
    need_pos(p.gamma, "gamma");
    need_pos(p.omega_m, "omega_m");
    need_pos(p.mass, "mass");
    if (!(p.gamma_m >= 0) || !std::isfinite(p.gamma_m))
        throw ValidationError("gamma_m must be >= 0");
    if (!(p.n_th >= 0) || !std::isfinite(p.n_th))
        throw ValidationError("n_th must be >= 0");
}

DerivedParams derive(const SystemParams& p, const PumpConfig& pump) {
    validate(p);
    if (!std::isfinite(pump.delta) || !std::isfinite(pump.theta) ||
        !std::isfinite(std::abs(pump.amp_plus)) || !std::isfinite(std::abs(pump.amp_minus)))
        throw ValidationError("pump values must be finite");
    DerivedParams d;
    d.x_z = std::sqrt(hbar / (2.0 * p.mass * p.omega_m));
    d.g = d.x_z * p.omega0 / p.cavity_length;
    d.gamma = p.gamma;
    d.omega_p = p.omega_m + pump.delta;
    const double s = std::sqrt(2.0 * p.gamma);
    d.d_plus = s * pump.amp_plus / cplx(p.gamma, -d.omega_p);
    d.d_minus = s * pump.amp_minus / cplx(p.gamma, d.omega_p);
    d.quad_phase_beta = std::atan2(p.omega_m, p.gamma);
    return d;
}

std::vector<std::string> validate_regime(const SystemParams& p, const RegimeThresholds& t) {
    std::vector<std::string> w;
    if (p.omega_m < t.sideband_factor * p.gamma) {
        std::ostringstream os;
        os << "resolved-sideband condition violated: omega_m/gamma = " << p.omega_m / p.gamma
           << " < " << t.sideband_factor;
        w.push_back(os.str());
    }
    if (p.gamma_m > 0 && p.gamma < t.damping_factor * p.gamma_m) {
        std::ostringstream os;
        os << "weak mechanical damping condition violated: gamma/gamma_m = " << p.gamma / p.gamma_m
           << " < " << t.damping_factor;
        w.push_back(os.str());
    }
    return w;
}

PumpConfig pump_for_strength(const SystemParams& p, double strength, double eps, double phi_r,
                             double phi_s) {
    validate(p);
    if (!(strength >= 0)) throw ValidationError("pump strength must be >= 0");
    if (!(std::abs(eps) <= 1)) throw ValidationError("imbalance must lie in [-1, 1]");
    const double g = std::sqrt(hbar / (2.0 * p.mass * p.omega_m)) * p.omega0 / p.cavity_length;
    // G(0) = g^2 N / gamma,  |D|^2 = 2 gamma |A|^2/(gamma^2 + wm^2)
    const double n = strength * p.gamma / (g * g);
    const double flux = n * (p.gamma * p.gamma + p.omega_m * p.omega_m) / (2.0 * p.gamma);
    PumpConfig pump;
    pump.amp_plus = std::polar(std::sqrt(0.5 * flux * (1 - eps)), phi_s - phi_r);
    pump.amp_minus = std::polar(std::sqrt(0.5 * flux * (1 + eps)), phi_s + phi_r);
    return pump;
}

std::pair<cplx, cplx> lo_tones(const PumpConfig& pump) {
    double n = std::sqrt(std::norm(pump.amp_plus) + std::norm(pump.amp_minus));
    if (n == 0) return {cplx(std::sqrt(0.5)), cplx(std::sqrt(0.5))};
    return {pump.amp_plus / n, pump.amp_minus / n};
}

Preset preset(const std::string& name) {
    Preset out;
    if (name == "paper-like") {
        SystemParams& s = out.params;
        s.omega0 = 2 * pi * 299792458.0 / 1064e-9;
        s.cavity_length = 1e-3;
        s.gamma = 1e6;
        s.omega_m = 3e7;
        s.gamma_m = 24;
        s.mass = 1e-11;
        s.n_th = 100;
        out.strength = 2e5;
        out.pump = pump_for_strength(s, out.strength);
        out.t_f = 1e-3;
    } else if (name == "fast-test") {
        SystemParams& s = out.params;
        s.gamma = 1;
        s.omega_m = 20;
        s.gamma_m = 0.01;
        s.n_th = 0;
        s.mass = hbar / (2 * s.omega_m);  // x_z = 1
        s.omega0 = 1e3;
        s.cavity_length = 1e6;             // g = 1e-3
        out.strength = 1.0;
        out.pump = pump_for_strength(s, out.strength);
        out.t_f = 100;
    } else {
        throw ValidationError("unknown preset '" + name + "'");
    }
    return out;
}

std::vector<std::string> preset_names() { return {"paper-like", "fast-test"}; }

}  // namespace bae

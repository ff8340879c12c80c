#include "bae/detection.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "bae/errors.hpp"

namespace bae {

namespace {

const cplx I1(0, 1);

void require_symmetric(const PumpConfig& pump, const char* what) {
    if (!pump.is_symmetric())
        throw AsymmetricPumpError(std::string(what) +
                                  ": closed form needs |A+| = |A-|; use the oracle path");
}

double sin_angle(const DetectionConfig& det) {
    double s = std::sin(det.angle());
    if (std::abs(s) < 1e-15) return 0;
    return s;
}

// rectangular window transform (e^{i nu t} - 1)/(i nu)
cplx window_transform(double nu, double t) {
    double x = 0.5 * nu * t;
    double sinc = std::abs(x) < 1e-8 ? 1 - x * x / 6 : std::sin(x) / x;
    return t * sinc * std::polar(1.0, x);
}

}  // namespace

DetectionConfig detection_config(const PumpConfig& pump, double t_f, double force_amp,
                                 double force_phase) {
    DetectionConfig det;
    det.theta = pump.theta;
    det.phi_r = pump.phi_r();
    det.t_f = t_f;
    det.force_amp = force_amp;
    det.force_phase = force_phase;
    return det;
}

cplx signal_transfer(double nu, const DetectionConfig& det, const SystemParams& p,
                     const PumpConfig& pump, const DerivedParams& d) {
    require_symmetric(pump, "signal_transfer");
    const cplx eta = std::sqrt(reflection_phase(nu, p.gamma));
    const cplx den(p.gamma_m, -nu);
    if (std::abs(den) <= 1e-12 * p.gamma) throw PoleError("signal transfer evaluated on its pole");
    return -std::polar(1.0, -det.phi_r) * std::sqrt(2.0 * d.strength(nu)) * eta * sin_angle(det) /
           den;
}

cplx force_quadrature(double nu, const DetectionConfig& det, const SystemParams& p,
                      const DerivedParams& d) {
    const double scale = std::sqrt(2.0 * hbar * p.mass * p.omega_m);
    return det.force_amp * window_transform(nu, det.t_f) *
           std::sin(d.quad_phase_beta - det.phi_r - det.force_phase) / scale;
}

cplx signal_current(double nu, const DetectionConfig& det, const SystemParams& p,
                    const PumpConfig& pump, const DerivedParams& d) {
    return signal_transfer(nu, det, p, pump, d) * force_quadrature(nu, det, p, d);
}

double noise_psd(double nu, const DetectionConfig& det, const SystemParams& p,
                 const PumpConfig& pump, const DerivedParams& d) {
    require_symmetric(pump, "noise_psd");
    const double s = sin_angle(det);
    if (p.gamma_m == 0) return 2.0;
    return 2.0 + 4.0 * d.strength(nu) * p.gamma_m * (2 * p.n_th + 1) * s * s /
                     (p.gamma_m * p.gamma_m + nu * nu);
}

double force_psd(double nu, const DetectionConfig& det, const SystemParams& p,
                 const PumpConfig& pump, const DerivedParams& d, bool corrected) {
    require_symmetric(pump, "force_psd");
    const double s = sin_angle(det);
    const double gs = d.strength(nu);
    if (s == 0) throw DomainError("force_psd: sin(theta - phi_r) = 0, no signal in this quadrature");
    if (gs == 0) throw DomainError("force_psd: zero pump strength");
    double v = (p.gamma_m * p.gamma_m + nu * nu) / (gs * s * s) + 2 * p.gamma_m * (2 * p.n_th + 1);
    if (corrected) v += gs * (p.gamma * p.gamma + nu * nu) / (p.omega_m * p.omega_m);
    return v;
}

ForceLimit min_detectable_force(const DetectionConfig& det, const SystemParams& p,
                                const PumpConfig& pump, const DerivedParams& d, bool corrected,
                                int n_points) {
    if (!(det.t_f > 0)) throw ValidationError("t_F must be positive");
    if (n_points < 1001) throw ValidationError("band integration needs >= 1001 points");
    if (n_points % 2 == 0) ++n_points;  // keep nu = 0 on the grid
    const double a = pi / det.t_f;
    const double h = 2 * a / (n_points - 1);
    double acc = 0;
    for (int k = 0; k < n_points; ++k) {
        double w = (k == 0 || k == n_points - 1) ? 0.5 : 1.0;
        acc += w * force_psd(-a + k * h, det, p, pump, d, corrected);
    }
    const double integral = acc * h / (2 * pi);
    ForceLimit out;
    out.f_min = std::sqrt(2 * hbar * p.mass * p.omega_m * integral);
    out.f_sql = 2 * std::sqrt(hbar * p.mass * p.omega_m) / det.t_f;
    out.ratio = out.f_min / out.f_sql;
    const double g0 = d.strength(0);
    out.reference_ratio = g0 > 0 ? pi * std::sqrt(2.0) / std::sqrt(3 * g0 * det.t_f)
                             : std::numeric_limits<double>::infinity();
    return out;
}

DerivedParams with_strength(const DerivedParams& d, double strength) {
    DerivedParams out = d;
    double g0 = d.strength(0);
    if (g0 <= 0) {
        // symmetric tones with zero phases
        double n = strength * d.gamma / (d.g * d.g);
        out.d_plus = std::sqrt(0.5 * n);
        out.d_minus = std::sqrt(0.5 * n);
        return out;
    }
    double s = std::sqrt(strength / g0);
    out.d_plus *= s;
    out.d_minus *= s;
    return out;
}

PumpConfig pump_with_strength(const SystemParams& p, const PumpConfig& pump, double strength) {
    DerivedParams d = derive(p, pump);
    double g0 = d.strength(0);
    PumpConfig out = pump;
    if (g0 <= 0) {
        out = pump_for_strength(p, strength);
        out.delta = pump.delta;
        out.theta = pump.theta;
        return out;
    }
    double s = std::sqrt(strength / g0);
    out.amp_plus *= s;
    out.amp_minus *= s;
    return out;
}

double optimal_pump(const DetectionConfig& det, const SystemParams& p, const PumpConfig& pump,
                    const DerivedParams& d, bool corrected) {
    if (!corrected)
        throw DomainError("optimal_pump: uncorrected sensitivity improves monotonically with G");
    require_symmetric(pump, "optimal_pump");
    auto objective = [&](double log_g) {
        DerivedParams dd = with_strength(d, std::exp(log_g));
        return min_detectable_force(det, p, pump, dd, true).ratio;
    };
    const double centre = std::log(p.omega_m / (p.gamma * det.t_f));
    double lo = centre - std::log(1e4), hi = centre + std::log(1e4);
    const double r = 0.5 * (std::sqrt(5.0) - 1);
    double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
    double f1 = objective(x1), f2 = objective(x2);
    while (hi - lo > 1e-9) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = objective(x2);
        }
    }
    double best = 0.5 * (lo + hi);
    if (best < centre - std::log(1e4) + 0.01 || best > centre + std::log(1e4) - 0.01)
        throw DomainError("optimal_pump: optimum not interior to the search bracket");
    return std::exp(best);
}

CurrentTransfer synodyne_compose(const TransferMatrix& t, const PumpConfig& pump,
                                 const DetectionConfig& det) {
    auto [lp, lm] = lo_tones(pump);
    const cplx ph = std::polar(1.0, det.angle());
    CurrentTransfer c = ph * (std::conj(lp) * t.row(out_a_up) + std::conj(lm) * t.row(out_a)) +
                        std::conj(ph) * (lp * t.row(out_ac) + lm * t.row(out_ac_up));
    return c;
}

double current_psd(const CurrentTransfer& c, double n_th) {
    double s = 0;
    for (int k = in_a; k <= in_ac_dn; ++k) s += std::norm(c(k));
    s += (n_th + 0.5) * (std::norm(c(in_bth)) + std::norm(c(in_bthc)));
    return s;
}

cplx composed_signal_transfer(const CurrentTransfer& c, const DetectionConfig& det,
                              const DerivedParams& d) {
    const cplx e = std::polar(1.0, d.quad_phase_beta - det.phi_r);
    return 0.5 * (c(in_f) * e + c(in_fc) * std::conj(e));
}

SpectrumResult spectrum(const std::vector<double>& grid, const DetectionConfig& det,
                        const SystemParams& p, const PumpConfig& pump, const DerivedParams& d,
                        Provenance how) {
    SpectrumResult r;
    r.grid = grid;
    r.provenance = how;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (how == Provenance::closed_form) require_symmetric(pump, "spectrum");
    for (double nu : grid) {
        double si = nan, sf = nan, sfc = nan;
        bool pole = false;
        try {
            if (how == Provenance::closed_form) {
                si = noise_psd(nu, det, p, pump, d);
                if (sin_angle(det) != 0 && d.strength(nu) > 0) {
                    sf = force_psd(nu, det, p, pump, d, false);
                    sfc = force_psd(nu, det, p, pump, d, true);
                }
            } else {
                const bool full = how == Provenance::oracle_2wm;
                CurrentTransfer c = synodyne_compose(oracle_transfer(nu, p, d, full).t, pump, det);
                si = current_psd(c, p.n_th);
                double h2 = std::norm(composed_signal_transfer(c, det, d));
                if (h2 > 0) {
                    sf = si / h2;
                    // the 8x8 solve already contains the residual back action
                    sfc = full ? sf : sf + d.strength(nu) * (p.gamma * p.gamma + nu * nu) /
                                               (p.omega_m * p.omega_m);
                }
            }
        } catch (const PoleError&) {
            pole = true;
            si = sf = sfc = nan;
        }
        r.s_i.push_back(si);
        r.s_f.push_back(sf);
        r.s_f_corrected.push_back(sfc);
        r.pole.push_back(pole);
    }
    return r;
}

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::closed_form: return "closed-form";
        case Provenance::oracle: return "oracle";
        case Provenance::oracle_2wm: return "oracle-2wm";
    }
    return "?";
}

}  // namespace bae

#pragma once

#include <vector>

#include "bae/linresp.hpp"

namespace bae {

// theta is the LO delay measured from phi_r: the LO field is e^{-i(theta - phi_r)}
// times the pump, so theta - phi_r is the detected optical quadrature.
struct DetectionConfig {
    double theta = 0;
    double phi_r = 0;
    double t_f = 1;
    double force_amp = 0;    // N
    double force_phase = 0;  // psi in F(t) = F cos(wm t - psi) on [0, t_f]

    double angle() const { return theta - phi_r; }
};

DetectionConfig detection_config(const PumpConfig& pump, double t_f, double force_amp = 0,
                                 double force_phase = 0);

// Transfer from the force quadrature f_phi(nu) to the current at wm + nu.
cplx signal_transfer(double nu, const DetectionConfig& det, const SystemParams& p,
                     const PumpConfig& pump, const DerivedParams& d);

// f_phi(nu) = e^{-i(beta-phi_r)} f_s(nu) + e^{i(beta-phi_r)} f~_s(nu) for the
// rectangular force of det.
cplx force_quadrature(double nu, const DetectionConfig& det, const SystemParams& p,
                      const DerivedParams& d);

cplx signal_current(double nu, const DetectionConfig& det, const SystemParams& p,
                    const PumpConfig& pump, const DerivedParams& d);

double noise_psd(double nu, const DetectionConfig& det, const SystemParams& p,
                 const PumpConfig& pump, const DerivedParams& d);

double force_psd(double nu, const DetectionConfig& det, const SystemParams& p,
                 const PumpConfig& pump, const DerivedParams& d, bool corrected);

struct ForceLimit {
    double f_min = 0;        // N
    double f_sql = 0;        // 2 sqrt(hbar m wm)/t_F
    double ratio = 0;        // f_min/f_sql
    double reference_ratio = 0;  // pi sqrt2/sqrt(3 G(0) t_F), reported alongside
};

ForceLimit min_detectable_force(const DetectionConfig& det, const SystemParams& p,
                                const PumpConfig& pump, const DerivedParams& d, bool corrected,
                                int n_points = 2001);

// Same pump shape with G(0) rescaled to `strength`.
DerivedParams with_strength(const DerivedParams& d, double strength);
PumpConfig pump_with_strength(const SystemParams& p, const PumpConfig& pump, double strength);

double optimal_pump(const DetectionConfig& det, const SystemParams& p, const PumpConfig& pump,
                    const DerivedParams& d, bool corrected);

// Current at wm + nu as a row over the linresp inputs.
using CurrentTransfer = Eigen::Matrix<cplx, 1, n_inputs>;

CurrentTransfer synodyne_compose(const TransferMatrix& t, const PumpConfig& pump,
                                 const DetectionConfig& det);

// PSD of the composed current from its noise inputs (vacuum 1, thermal n_th + 1/2).
double current_psd(const CurrentTransfer& c, double n_th);

// Signal transfer H with c_f = H e^{-i alpha}, c_f~ = H e^{i alpha}, alpha = beta - phi_r.
cplx composed_signal_transfer(const CurrentTransfer& c, const DetectionConfig& det,
                              const DerivedParams& d);

enum class Provenance { closed_form, oracle, oracle_2wm };

struct SpectrumResult {
    std::vector<double> grid;
    std::vector<double> s_i;
    std::vector<double> s_f;
    std::vector<double> s_f_corrected;
    std::vector<bool> pole;  // flagged rows, values NaN
    Provenance provenance = Provenance::closed_form;
};

SpectrumResult spectrum(const std::vector<double>& grid, const DetectionConfig& det,
                        const SystemParams& p, const PumpConfig& pump, const DerivedParams& d,
                        Provenance how);

const char* to_string(Provenance p);

}  // namespace bae

#pragma once

#include <Eigen/Dense>

#include "bae/model.hpp"

namespace bae {

// Omega is the offset from the optical carrier for optical amplitudes and from
// omega_m for mechanical ones. a~(x) denotes the transform of a^dagger(t) at x,
// i.e. a^dagger(-x) in the convention where both transforms share one sign.
struct OutputTransfer {
    double freq = 0;
    cplx c_shot{};       // a_in(Omega)
    cplx c_shot_conj{};  // a~_in(Omega)
    cplx c_thermal{};    // d_th = (D- b_th + D+ b~_th)/sqrt(N)
    cplx c_signal{};     // (D- f_s + D+ f~_s)/sqrt(N)
    cplx gamma_opt{};    // Gamma(Omega)
};

struct MechResponse {
    double freq = 0;
    cplx chi_eff{};
    cplx ba_coeff_ain{};
    cplx ba_coeff_ain_conj{};
    cplx drive_coeff{};
};

// Input channels of the full transfer matrix.
enum Input : int {
    in_a = 0,      // a_in(Omega)
    in_ac,         // a~_in(Omega)
    in_a_up,       // a_in(Omega + 2 wm)
    in_ac_up,      // a~_in(Omega + 2 wm)
    in_a_dn,       // a_in(Omega - 2 wm)
    in_ac_dn,      // a~_in(Omega - 2 wm)
    in_bth,        // b_th(Omega)
    in_bthc,       // b~_th(Omega)
    in_f,          // f_s(Omega)
    in_fc,         // f~_s(Omega) = f_s^*(-Omega)
    n_inputs
};

// Output rows of the full transfer matrix.
enum Output : int {
    out_a = 0,  // a_out(Omega)
    out_ac,
    out_a_up,
    out_ac_up,
    out_a_dn,
    out_ac_dn,
    out_b,      // b(Omega)
    out_bc,     // b~(Omega)
    n_outputs
};

using TransferMatrix = Eigen::Matrix<cplx, n_outputs, n_inputs>;

struct OracleTransfer {
    double freq = 0;
    bool include_2wm = false;
    TransferMatrix t = TransferMatrix::Zero();
};

// Reads c_shot etc. off a full transfer matrix; Gamma comes from the b <- f_s entry.
OutputTransfer project_transfer(const TransferMatrix& t, double freq, double gamma_m,
                                const DerivedParams& d);

// e^{2i eta} = (gamma + i Omega)/(gamma - i Omega)
template <class Scalar>
std::complex<Scalar> reflection_phase(Scalar omega, Scalar gamma) {
    return std::complex<Scalar>(gamma, omega) / std::complex<Scalar>(gamma, -omega);
}

cplx opt_damping(double freq, const DerivedParams& d);

OutputTransfer output_transfer(double freq, const SystemParams& p, const PumpConfig& pump,
                               const DerivedParams& d);

MechResponse mech_response(double freq, const SystemParams& p, const PumpConfig& pump,
                           const DerivedParams& d);

// Brute-force solve of the linearized sideband equations (4x4 at RWA, 8x8 with
// the +-2 omega_m optical channels).
OracleTransfer oracle_transfer(double freq, const SystemParams& p, const DerivedParams& d,
                               bool include_2wm);

OutputTransfer oracle_solve(double freq, const SystemParams& p, const PumpConfig& pump,
                            const DerivedParams& d, bool include_2wm);

// |c_shot - e^{2i eta}| + |c_shot_conj| from the RWA oracle: the shot-noise
// channel's departure from bare reflection caused by back action.
double back_action_residual(double freq, const SystemParams& p, const PumpConfig& pump,
                            const DerivedParams& d);

// Closed-form transfer assembled into the same matrix layout (far channels are
// bare reflection).
TransferMatrix closed_form_matrix(double freq, const SystemParams& p, const DerivedParams& d);

}  // namespace bae

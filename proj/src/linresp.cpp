#include "bae/linresp.hpp"

#include <cmath>
#include <sstream>

#include "bae/errors.hpp"

namespace bae {

namespace {

const cplx I1(0, 1);

cplx mech_denominator(double freq, double gamma_m, const DerivedParams& d) {
    cplx den = gamma_m + opt_damping(freq, d) - I1 * freq;
    if (std::abs(den) <= 1e-12 * d.gamma) {
        std::ostringstream os;
        os << "linear-response pole at Omega = " << freq << " (gamma_m + Gamma - i Omega = " << den
           << ")";
        throw PoleError(os.str());
    }
    return den;
}

}  // namespace

cplx opt_damping(double freq, const DerivedParams& d) {
    double diff = std::norm(d.d_minus) - std::norm(d.d_plus);
    return d.g * d.g * diff / cplx(d.gamma, -freq);
}

OutputTransfer output_transfer(double freq, const SystemParams& p, const PumpConfig&,
                               const DerivedParams& d) {
    OutputTransfer o;
    o.freq = freq;
    o.gamma_opt = opt_damping(freq, d);
    const cplx den = mech_denominator(freq, p.gamma_m, d);
    const cplx r = reflection_phase(freq, p.gamma);
    o.c_shot = r * (p.gamma_m - std::conj(o.gamma_opt) - I1 * freq) / den;
    o.c_shot_conj = 0;
    // sqrt(2G) e^{i eta} with eta = atan(Omega/gamma)
    const cplx root = std::sqrt(2.0 * d.strength(freq)) * std::sqrt(r);
    o.c_signal = I1 * root / den;
    o.c_thermal = o.c_signal * std::sqrt(2.0 * p.gamma_m);
    return o;
}

MechResponse mech_response(double freq, const SystemParams& p, const PumpConfig&,
                           const DerivedParams& d) {
    MechResponse m;
    m.freq = freq;
    m.chi_eff = 1.0 / mech_denominator(freq, p.gamma_m, d);
    const cplx pre = m.chi_eff * I1 * d.g * std::sqrt(2.0 * p.gamma) / cplx(p.gamma, -freq);
    m.ba_coeff_ain = pre * std::conj(d.d_minus);
    m.ba_coeff_ain_conj = pre * d.d_plus;
    m.drive_coeff = m.chi_eff;
    return m;
}

TransferMatrix closed_form_matrix(double freq, const SystemParams& p, const DerivedParams& d) {
    TransferMatrix t = TransferMatrix::Zero();
    const double wm2 = 2 * p.omega_m;
    const cplx chi = 1.0 / mech_denominator(freq, p.gamma_m, d);
    const cplx cav = 1.0 / cplx(p.gamma, -freq);
    const double s2g = std::sqrt(2.0 * p.gamma), s2gm = std::sqrt(2.0 * p.gamma_m);
    const cplx dp = d.d_plus, dm = d.d_minus;
    const double g = d.g;

    // mechanics
    const cplx ba = I1 * g * s2g * cav * chi;
    t(out_b, in_a) = ba * std::conj(dm);
    t(out_b, in_ac) = ba * dp;
    t(out_b, in_bth) = chi * s2gm;
    t(out_b, in_f) = chi;
    t(out_bc, in_a) = -ba * std::conj(dp);
    t(out_bc, in_ac) = -ba * dm;
    t(out_bc, in_bthc) = chi * s2gm;
    t(out_bc, in_fc) = chi;

    // a_out = -a_in + sqrt(2 gamma) d
    const cplx shot = reflection_phase(freq, p.gamma) *
                      (p.gamma_m - std::conj(opt_damping(freq, d)) - I1 * freq) * chi;
    const cplx via = I1 * g * s2g * cav;  // d <- ig(D- b + D+ b~)/(gamma - i Omega)
    for (int k : {in_bth, in_bthc, in_f, in_fc}) {
        t(out_a, k) = via * (dm * t(out_b, k) + dp * t(out_bc, k));
        t(out_ac, k) = -via * (std::conj(dm) * t(out_bc, k) + std::conj(dp) * t(out_b, k));
    }
    t(out_a, in_a) = shot;
    t(out_ac, in_ac) = shot;

    t(out_a_up, in_a_up) = reflection_phase(freq + wm2, p.gamma);
    t(out_ac_up, in_ac_up) = t(out_a_up, in_a_up);
    t(out_a_dn, in_a_dn) = reflection_phase(freq - wm2, p.gamma);
    t(out_ac_dn, in_ac_dn) = t(out_a_dn, in_a_dn);
    return t;
}

OracleTransfer oracle_transfer(double freq, const SystemParams& p, const DerivedParams& d,
                               bool include_2wm) {
    const int n = include_2wm ? 8 : 4;
    using Mat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8>;
    using InMat = Eigen::Matrix<cplx, Eigen::Dynamic, n_inputs, 0, 8, n_inputs>;
    Mat m = Mat::Zero(n, n);
    InMat b = InMat::Zero(n, n_inputs);

    const double g = d.g, wm2 = 2 * p.omega_m;
    const cplx dp = d.d_plus, dm = d.d_minus;
    const double s2g = std::sqrt(2.0 * p.gamma), s2gm = std::sqrt(2.0 * p.gamma_m);
    const cplx ig = I1 * g;
    enum { D = 0, Dc, B, Bc, Up, UpC, Dn, DnC };

    // optical, rwa
    m(D, D) = cplx(p.gamma, -freq);
    m(D, B) = -ig * dm;
    m(D, Bc) = -ig * dp;
    b(D, in_a) = s2g;
    m(Dc, Dc) = cplx(p.gamma, -freq);
    m(Dc, Bc) = ig * std::conj(dm);
    m(Dc, B) = ig * std::conj(dp);
    b(Dc, in_ac) = s2g;
    // mechanical
    m(B, B) = cplx(p.gamma_m, -freq);
    m(B, D) = -ig * std::conj(dm);
    m(B, Dc) = -ig * dp;
    b(B, in_bth) = s2gm;
    b(B, in_f) = 1;
    m(Bc, Bc) = cplx(p.gamma_m, -freq);
    m(Bc, Dc) = ig * dm;
    m(Bc, D) = ig * std::conj(dp);
    b(Bc, in_bthc) = s2gm;
    b(Bc, in_fc) = 1;

    if (include_2wm) {
        m(B, Up) = -ig * std::conj(dp);
        m(B, UpC) = -ig * dm;
        m(Bc, DnC) = ig * dp;
        m(Bc, Dn) = ig * std::conj(dm);
        m(Up, Up) = cplx(p.gamma, -(freq + wm2));
        m(Up, B) = -ig * dp;
        b(Up, in_a_up) = s2g;
        m(UpC, UpC) = cplx(p.gamma, -(freq + wm2));
        m(UpC, B) = ig * std::conj(dm);
        b(UpC, in_ac_up) = s2g;
        m(Dn, Dn) = cplx(p.gamma, -(freq - wm2));
        m(Dn, Bc) = -ig * dm;
        b(Dn, in_a_dn) = s2g;
        m(DnC, DnC) = cplx(p.gamma, -(freq - wm2));
        m(DnC, Bc) = ig * std::conj(dp);
        b(DnC, in_ac_dn) = s2g;
    } else {
        // exact pole test in the rwa model
        mech_denominator(freq, p.gamma_m, d);
    }

    Eigen::PartialPivLU<Mat> lu(m);
    if (include_2wm && !(lu.rcond() > 1e-14)) {
        std::ostringstream os;
        os << "oracle matrix singular at Omega = " << freq << " (rcond " << lu.rcond() << ")";
        throw PoleError(os.str());
    }
    InMat x = lu.solve(b);
    // near the mechanical pole the solve loses cond*eps; refine with an extended-precision residual
    using lcplx = std::complex<long double>;
    const auto ml = m.template cast<lcplx>().eval();
    const auto bl = b.template cast<lcplx>().eval();
    for (int it = 0; it < 2; ++it) {
        InMat r = (bl - ml * x.template cast<lcplx>()).template cast<cplx>();
        x += lu.solve(r);
    }

    OracleTransfer o;
    o.freq = freq;
    o.include_2wm = include_2wm;
    TransferMatrix& t = o.t;
    t.row(out_a) = s2g * x.row(D);
    t(out_a, in_a) -= 1.0;
    t.row(out_ac) = s2g * x.row(Dc);
    t(out_ac, in_ac) -= 1.0;
    t.row(out_b) = x.row(B);
    t.row(out_bc) = x.row(Bc);
    if (include_2wm) {
        t.row(out_a_up) = s2g * x.row(Up);
        t.row(out_ac_up) = s2g * x.row(UpC);
        t.row(out_a_dn) = s2g * x.row(Dn);
        t.row(out_ac_dn) = s2g * x.row(DnC);
        t(out_a_up, in_a_up) -= 1.0;
        t(out_ac_up, in_ac_up) -= 1.0;
        t(out_a_dn, in_a_dn) -= 1.0;
        t(out_ac_dn, in_ac_dn) -= 1.0;
    } else {
        t(out_a_up, in_a_up) = reflection_phase(freq + wm2, p.gamma);
        t(out_ac_up, in_ac_up) = t(out_a_up, in_a_up);
        t(out_a_dn, in_a_dn) = reflection_phase(freq - wm2, p.gamma);
        t(out_ac_dn, in_ac_dn) = t(out_a_dn, in_a_dn);
    }
    return o;
}

OutputTransfer project_transfer(const TransferMatrix& t, double freq, double gamma_m,
                                const DerivedParams& d) {
    OutputTransfer o;
    o.freq = freq;
    o.c_shot = t(out_a, in_a);
    o.c_shot_conj = t(out_a, in_ac);
    o.gamma_opt = 1.0 / t(out_b, in_f) - gamma_m + I1 * freq;
    const double n = std::sqrt(d.photon_sum());
    if (n > 0) {
        const cplx um = std::conj(d.d_minus) / n, up = std::conj(d.d_plus) / n;
        o.c_thermal = t(out_a, in_bth) * um + t(out_a, in_bthc) * up;
        o.c_signal = t(out_a, in_f) * um + t(out_a, in_fc) * up;
    }
    return o;
}

OutputTransfer oracle_solve(double freq, const SystemParams& p, const PumpConfig&,
                            const DerivedParams& d, bool include_2wm) {
    return project_transfer(oracle_transfer(freq, p, d, include_2wm).t, freq, p.gamma_m, d);
}

double back_action_residual(double freq, const SystemParams& p, const PumpConfig& pump,
                            const DerivedParams& d) {
    OutputTransfer o = oracle_solve(freq, p, pump, d, false);
    return std::abs(o.c_shot - reflection_phase(freq, p.gamma)) + std::abs(o.c_shot_conj);
}

}  // namespace bae

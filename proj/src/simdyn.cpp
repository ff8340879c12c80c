#include "bae/simdyn.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "bae/errors.hpp"
#include "bae/linresp.hpp"
#include "bae/philox.hpp"

namespace bae {

namespace {

const cplx I1(0, 1);

using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;
using Mat10 = Eigen::Matrix<double, 10, 10>;
using Vec10 = Eigen::Matrix<double, 10, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using Vec8 = Eigen::Matrix<double, 8, 1>;

// real 2x2 block of z -> a z + b conj(z)
Mat2 block(cplx a, cplx b) {
    Mat2 m;
    m << a.real() + b.real(), -a.imag() + b.imag(), a.imag() + b.imag(), a.real() - b.real();
    return m;
}

// dense solve of the odd-harmonic cavity equations for given q
std::vector<cplx> solve_field(const SystemParams& p, const DerivedParams& d, const PumpConfig& pump,
                              const std::vector<cplx>& q, int order) {
    const int n = order + 1;  // odd m in [-order, order]
    auto idx = [&](int m) { return (m + order) / 2; };
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
    for (int m = -order; m <= order; m += 2) {
        a(idx(m), idx(m)) += cplx(p.gamma, -m * d.omega_p);
        for (int k = -(order + 1); k <= order + 1; k += 2) {
            int j = m - k;
            if (k == 0 || j < -order || j > order) continue;
            a(idx(m), idx(j)) -= I1 * d.g * q[k + order + 1];
        }
    }
    const double s = std::sqrt(2 * p.gamma);
    rhs(idx(1)) = s * pump.amp_plus;
    rhs(idx(-1)) = s * pump.amp_minus;
    Eigen::VectorXcd x = a.partialPivLu().solve(rhs);
    std::vector<cplx> c(2 * order + 1, 0.0);
    for (int m = -order; m <= order; m += 2) c[m + order] = x(idx(m));
    return c;
}

}  // namespace

cplx MeanOrbit::field(double t) const {
    const cplx step = std::polar(1.0, -2 * omega_p * t);
    cplx ph = std::polar(1.0, order * omega_p * t);  // e^{-i m wp t} at m = -order
    cplx acc = 0;
    for (int m = -order; m <= order; m += 2) {
        acc += c[m + order] * ph;
        ph *= step;
    }
    return acc;
}

double MeanOrbit::displacement(double t) const {
    double acc = 0;
    for (int k = 2; k <= order + 1; k += 2)
        acc += 2 * (q_at(k) * std::polar(1.0, -k * omega_p * t)).real();
    return acc;
}

MeanOrbit mean_orbit(const SystemParams& p, const DerivedParams& d, bool include_2wm,
                     std::optional<cplx> compensation, int order) {
    if (order < 1 || order % 2 == 0) throw ValidationError("orbit order must be odd and >= 1");
    MeanOrbit o;
    o.omega_p = d.omega_p;
    o.order = include_2wm ? order : 1;
    o.c.assign(2 * o.order + 1, 0.0);
    o.q.assign(2 * o.order + 3, 0.0);
    o.c[o.order + 1] = d.d_plus;
    o.c[o.order - 1] = d.d_minus;
    if (!include_2wm) return o;

    // pump amplitudes back from D (keeps the delta-dependent factor)
    PumpConfig pump;
    const double s = std::sqrt(2 * p.gamma);
    pump.amp_plus = d.d_plus * cplx(p.gamma, -d.omega_p) / s;
    pump.amp_minus = d.d_minus * cplx(p.gamma, d.omega_p) / s;
    const double force_scale = 1.0 / std::sqrt(2 * hbar * p.mass * p.omega_m);
    const int kmax = o.order + 1;

    for (int it = 0; it < 200; ++it) {
        std::vector<cplx> c = solve_field(p, d, pump, o.q, o.order);
        std::vector<cplx> q(o.q.size(), 0.0);
        // lab-frame b_k for even k != 0
        std::vector<cplx> b(q.size(), 0.0);
        for (int k = -kmax; k <= kmax; k += 2) {
            if (k == 0) continue;
            cplx src = 0;  // (|c|^2)_k = sum_m c_m conj(c_{m-k})
            for (int m = -o.order; m <= o.order; m += 2) {
                int j = m - k;
                if (j < -o.order || j > o.order) continue;
                src += c[m + o.order] * std::conj(c[j + o.order]);
            }
            src *= d.g;
            if (compensation) {
                if (k == 2) src += 0.5 * *compensation * force_scale;
                if (k == -2) src += 0.5 * std::conj(*compensation) * force_scale;
            }
            b[k + kmax] = I1 * src / cplx(p.gamma_m, p.omega_m - k * d.omega_p);
        }
        for (int k = -kmax; k <= kmax; k += 2)
            if (k != 0) q[k + kmax] = b[k + kmax] + std::conj(b[-k + kmax]);

        double change = 0, scale = 1e-300;
        for (size_t i = 0; i < c.size(); ++i) {
            change = std::max(change, std::abs(c[i] - o.c[i]));
            scale = std::max(scale, std::abs(c[i]));
        }
        o.c = c;
        o.q = q;
        o.iterations = it + 1;
        if (change <= 1e-14 * scale && it > 0) return o;
    }
    throw PerturbationError("mean orbit harmonic balance did not converge");
}

TimeSeries simulate(const SystemParams& p, const PumpConfig& pump, const SimConfig& cfg) {
    const DerivedParams d = derive(p, pump);
    const double h = cfg.dt;
    if (!(h > 0) || !(cfg.duration > 0)) throw ValidationError("dt and duration must be positive");
    if (cfg.downsample < 1 || cfg.envelope_downsample < 0)
        throw ValidationError("downsample factors must be >= 1");
    if (cfg.include_2wm && h > 0.05 / p.omega_m) {
        std::ostringstream os;
        os << "dt = " << h << " exceeds 0.05/omega_m = " << 0.05 / p.omega_m << " with include_2wm";
        throw StepSizeError(os.str());
    }
    if (!cfg.include_2wm && h > 0.1 / p.gamma) {
        std::ostringstream os;
        os << "dt = " << h << " exceeds 0.1/gamma = " << 0.1 / p.gamma;
        throw StepSizeError(os.str());
    }
    if (d.omega_p * h >= pi)
        throw StepSizeError("dt too coarse to sample the local oscillator (omega_p dt >= pi)");

    TimeSeries out;
    out.dt = h;
    const double gm_eff = p.gamma_m + opt_damping(0, d).real();
    if (gm_eff > 0 && cfg.duration < 50 / gm_eff) {
        std::ostringstream os;
        os << "duration " << cfg.duration << " shorter than 50/gamma_m_eff = " << 50 / gm_eff
           << "; spectral estimates will be biased";
        out.warnings.push_back(os.str());
    }

    const MeanOrbit orbit = mean_orbit(p, d, cfg.include_2wm, cfg.compensation);
    const cplx cp = orbit.c_at(1), cm = orbit.c_at(-1);
    const double g = d.g, wp = d.omega_p, detune = wp - p.omega_m;
    const cplx ig = I1 * g;

    // augmented drift: y(4), Y = int dc (2), W = int xi_in (2), u (2)
    Mat10 f = Mat10::Zero();
    f.block<2, 2>(0, 0) = block(-p.gamma, 0);
    f.block<2, 2>(0, 2) = block(ig * cm, ig * cp);
    f.block<2, 2>(2, 0) = block(ig * std::conj(cm), ig * cp);
    f.block<2, 2>(2, 2) = block(cplx(-p.gamma_m, detune), 0);
    f.block<2, 2>(2, 8) = Mat2::Identity();
    f.block<2, 2>(4, 0) = Mat2::Identity();
    Eigen::Matrix<double, 10, 4> l = Eigen::Matrix<double, 10, 4>::Zero();
    l.block<2, 2>(0, 0) = std::sqrt(2 * p.gamma) * Mat2::Identity();
    l.block<2, 2>(6, 0) = Mat2::Identity();
    l.block<2, 2>(2, 2) = std::sqrt(2 * p.gamma_m) * Mat2::Identity();
    Eigen::Vector4d intensity(0.5, 0.5, 0.5 * (p.n_th + 0.5), 0.5 * (p.n_th + 0.5));
    Mat10 qc = l * intensity.asDiagonal() * l.transpose();

    // Van Loan: exp([[-F, Qc], [0, F^T]] h)
    auto discretize = [&](double step, Mat10& phi, Mat10& qd) {
        Eigen::Matrix<double, 20, 20> m = Eigen::Matrix<double, 20, 20>::Zero();
        m.block<10, 10>(0, 0) = -f * step;
        m.block<10, 10>(0, 10) = qc * step;
        m.block<10, 10>(10, 10) = f.transpose() * step;
        Eigen::Matrix<double, 20, 20> e = m.exp();
        phi = e.block<10, 10>(10, 10).transpose();
        qd = phi * e.block<10, 10>(0, 10);
        qd = 0.5 * (qd + qd.transpose()).eval();
    };
    Mat10 phi, qd, phi_half, qd_half;
    discretize(h, phi, qd);
    discretize(0.5 * h, phi_half, qd_half);

    Mat8 noise_sqrt = Mat8::Zero();
    if (cfg.noise) {
        Eigen::SelfAdjointEigenSolver<Mat8> es(qd.block<8, 8>(0, 0));
        Vec8 ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        noise_sqrt = es.eigenvectors() * ev.asDiagonal();
    }
    const NormalStream rng(cfg.seed);

    auto [lo_p, lo_m] = lo_tones(pump);
    const cplx lo_phase = std::polar(1.0, pump.theta - pump.phi_r());
    const double force_scale = 1.0 / std::sqrt(2 * hbar * p.mass * p.omega_m);

    const long long n_steps = static_cast<long long>(std::llround(cfg.duration / h));
    const int env_ds = cfg.envelope_downsample > 0 ? cfg.envelope_downsample : cfg.downsample;
    out.current_dt = h * cfg.downsample;
    out.times.reserve(n_steps / env_ds + 1);
    out.d.reserve(n_steps / env_ds + 1);
    out.b.reserve(n_steps / env_ds + 1);
    out.current.reserve(n_steps / cfg.downsample + 1);

    Vec4 y(cfg.d0.real(), cfg.d0.imag(), cfg.b0.real(), cfg.b0.imag());
    const double scale = std::max(std::abs(cfg.b0), 1.0);
    const double limit = cfg.overflow_factor * scale;
    const double s2g = std::sqrt(2 * p.gamma);
    double acc = 0;
    int acc_n = 0;

    for (long long k = 0; k <= n_steps; ++k) {
        const double t = k * h;
        if (k % env_ds == 0) {
            out.times.push_back(t);
            out.d.emplace_back(y(0), y(1));
            out.b.emplace_back(y(2), y(3));
        }
        const double bmag = std::hypot(y(2), y(3));
        if (!(bmag <= limit)) {
            // growth rate from the last half of the recorded envelope
            size_t n = out.b.size(), first = n / 2;
            double st = 0, sy = 0, stt = 0, sty = 0, cnt = 0;
            for (size_t i = first; i < n; ++i) {
                double ly = std::log(std::max(std::abs(out.b[i]), 1e-300));
                st += out.times[i];
                sy += ly;
                stt += out.times[i] * out.times[i];
                sty += out.times[i] * ly;
                cnt += 1;
            }
            double rate = cnt > 1 ? (cnt * sty - st * sy) / (cnt * stt - st * st) : 0;
            std::ostringstream os;
            os << "runaway instability: |b| exceeded " << cfg.overflow_factor
               << " x initial scale at t = " << t << "; measured growth rate " << rate << " 1/s";
            throw InstabilityHalt(os.str(), rate, t);
        }
        if (k == n_steps) break;

        Vec10 z = Vec10::Zero();
        z.head<4>() = y;
        if (cfg.force) {
            const ForceDrive& fd = *cfg.force;
            double a = std::max(t, fd.t_on), b = std::min(t + h, fd.t_on + fd.t_f);
            if (b > a) {
                double frac = (b - a) / h;
                cplx u = frac * I1 * fd.amp * std::polar(1.0, fd.phase + detune * (t + 0.5 * h)) *
                         0.5 * force_scale;
                z(8) = u.real();
                z(9) = u.imag();
            }
        }

        Vec10 zn;
        if (cfg.include_2wm) {
            zn = phi_half * z;
            const double tm = t + 0.5 * h;
            const cplx cbar = orbit.field(tm);
            const double qbar = orbit.displacement(tm);
            const cplx e = std::polar(1.0, wp * tm);
            Mat4 pm = Mat4::Zero();
            pm.block<2, 2>(0, 0) = block(ig * qbar, 0);
            pm.block<2, 2>(0, 2) = block(ig * (cbar * std::conj(e) - cm), ig * (cbar * e - cp));
            pm.block<2, 2>(2, 0) = block(ig * (e * std::conj(cbar) - std::conj(cm)),
                                         ig * (e * cbar - cp));
            Vec4 v = zn.head<4>();
            Vec4 pv = pm * v;
            zn.head<4>() = v + h * pv + 0.5 * h * h * (pm * pv);
            zn = (phi_half * zn).eval();
        } else {
            zn = phi * z;
        }
        if (cfg.noise) {
            Vec8 nrm;
            auto n0 = rng.block(static_cast<std::uint64_t>(k), 0);
            auto n1 = rng.block(static_cast<std::uint64_t>(k), 1);
            nrm << n0[0], n0[1], n0[2], n0[3], n1[0], n1[1], n1[2], n1[3];
            zn.head<8>() += noise_sqrt * nrm;
        }
        y = zn.head<4>();

        // step-averaged output field and synodyne current at the step midpoint
        const cplx yint(zn(4), zn(5)), dw(zn(6), zn(7));
        const cplx aout = (-dw + s2g * yint) / h;
        const cplx e = std::polar(1.0, wp * (t + 0.5 * h));
        const cplx lo_conj = std::conj(lo_p) * e + std::conj(lo_m) * std::conj(e);
        acc += 2 * (lo_phase * lo_conj * aout).real();
        if (++acc_n == cfg.downsample) {
            out.current.push_back(acc / acc_n);
            acc = 0;
            acc_n = 0;
        }
    }
    return out;
}

}  // namespace bae

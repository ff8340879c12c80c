#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bae/model.hpp"

namespace bae {

// Classical signal force F(t) = amp cos(wm t - phase) on [t_on, t_on + t_f].
struct ForceDrive {
    double amp = 0;
    double phase = 0;
    double t_on = 0;
    double t_f = 0;
};

struct SimConfig {
    double dt = 0;
    double duration = 0;
    std::uint64_t seed = 0;
    bool include_2wm = false;
    bool noise = true;
    // classical 2 wp drive F(t) = Re(F e^{-2i wp t}) on the mirror
    std::optional<cplx> compensation;
    std::optional<ForceDrive> force;
    int downsample = 1;           // boxcar length for the current
    int envelope_downsample = 0;  // point sampling of d, b; 0 = same as downsample
    cplx b0{};                    // initial mechanical envelope
    cplx d0{};
    double overflow_factor = 1e12;
};

// Fluctuation envelopes (mean orbit removed). d is in the optical carrier frame,
// b in the frame rotating at wp = wm + delta.
struct TimeSeries {
    double dt = 0;  // integration step
    std::vector<double> times;
    std::vector<cplx> d;
    std::vector<cplx> b;
    double current_dt = 0;  // current sample k averages [k, k+1) * current_dt
    std::vector<double> current;
    std::vector<std::string> warnings;
};

// Periodic mean solution: c(t) = sum_m c_m e^{-i m wp t} (odd m),
// x(t)/x_z = sum_k q_k e^{-i k wp t} (even k, DC removed).
struct MeanOrbit {
    double omega_p = 0;
    int order = 1;
    std::vector<cplx> c;  // index m + order
    std::vector<cplx> q;  // index k + order + 1
    int iterations = 0;

    cplx c_at(int m) const { return c[m + order]; }
    cplx q_at(int k) const { return q[k + order + 1]; }
    cplx field(double t) const;
    double displacement(double t) const;
};

MeanOrbit mean_orbit(const SystemParams& p, const DerivedParams& d, bool include_2wm,
                     std::optional<cplx> compensation = {}, int order = 7);

TimeSeries simulate(const SystemParams& p, const PumpConfig& pump, const SimConfig& cfg);

struct PsdEstimate {
    std::vector<double> omega;  // rad/s, 0 .. pi/dt
    std::vector<double> psd;
    int segments = 0;
    double rel_error = 0;
};

// Hann-windowed Welch average; S(w) = <|sum x_n w_n e^{i w n dt}|^2> dt / sum w_n^2,
// so a white sequence of variance v reads v dt.
PsdEstimate estimate_psd(const std::vector<double>& x, double dt, int segment_length,
                         double overlap = 0.5);
PsdEstimate estimate_psd(const TimeSeries& s, int segment_length, double overlap = 0.5);

// -d log|b|/dt from a least-squares line over [t_start, t_end]; positive = decay.
double ringdown_rate(const TimeSeries& s, double t_start, double t_end, double max_rms = 0.3);

}  // namespace bae

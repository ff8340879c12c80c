#include <cmath>
#include <complex>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "bae/errors.hpp"
#include "bae/simdyn.hpp"

namespace bae {

PsdEstimate estimate_psd(const std::vector<double>& x, double dt, int segment_length,
                         double overlap) {
    if (segment_length < 4) throw ValidationError("segment_length must be >= 4");
    if (!(overlap >= 0 && overlap < 1)) throw ValidationError("overlap must lie in [0, 1)");
    const size_t len = static_cast<size_t>(segment_length);
    const size_t hop = std::max<size_t>(1, static_cast<size_t>(std::llround(len * (1 - overlap))));
    const size_t segs = x.size() < len ? 0 : 1 + (x.size() - len) / hop;
    if (segs < 8) {
        std::ostringstream os;
        os << "estimate_psd: " << x.size() << " samples give " << segs
           << " segments of length " << len << ", need at least 8";
        throw InsufficientDataError(os.str());
    }

    std::vector<double> w(len);
    double wsum2 = 0;
    for (size_t n = 0; n < len; ++n) {
        w[n] = 0.5 * (1 - std::cos(2 * pi * n / len));
        wsum2 += w[n] * w[n];
    }

    Eigen::FFT<double> fft;
    std::vector<double> buf(len);
    std::vector<std::complex<double>> spec;
    const size_t nbin = len / 2 + 1;
    PsdEstimate est;
    est.psd.assign(nbin, 0.0);
    for (size_t s = 0; s < segs; ++s) {
        const double* seg = x.data() + s * hop;
        double mean = 0;
        for (size_t n = 0; n < len; ++n) mean += seg[n];
        mean /= len;
        for (size_t n = 0; n < len; ++n) buf[n] = (seg[n] - mean) * w[n];
        fft.fwd(spec, buf);
        for (size_t j = 0; j < nbin; ++j) est.psd[j] += std::norm(spec[j]);
    }
    const double norm = dt / (wsum2 * segs);
    est.omega.resize(nbin);
    for (size_t j = 0; j < nbin; ++j) {
        est.psd[j] *= norm;
        est.omega[j] = 2 * pi * j / (len * dt);
    }
    est.segments = static_cast<int>(segs);
    est.rel_error = 1 / std::sqrt(double(segs));
    return est;
}

PsdEstimate estimate_psd(const TimeSeries& s, int segment_length, double overlap) {
    return estimate_psd(s.current, s.current_dt, segment_length, overlap);
}

double ringdown_rate(const TimeSeries& s, double t_start, double t_end, double max_rms) {
    double st = 0, sy = 0, stt = 0, sty = 0;
    int n = 0;
    std::vector<std::pair<double, double>> pts;
    for (size_t i = 0; i < s.times.size(); ++i) {
        double t = s.times[i];
        if (t < t_start || t > t_end) continue;
        double a = std::abs(s.b[i]);
        if (!(a > 0)) throw PoorFitError("ringdown_rate: zero envelope inside the fit window");
        double ly = std::log(a);
        pts.emplace_back(t, ly);
        st += t;
        sy += ly;
        stt += t * t;
        sty += t * ly;
        ++n;
    }
    if (n < 3) throw InsufficientDataError("ringdown_rate: fewer than 3 samples in window");
    const double den = n * stt - st * st;
    const double slope = (n * sty - st * sy) / den;
    const double icpt = (sy - slope * st) / n;
    double ss = 0;
    for (auto [t, ly] : pts) ss += (ly - icpt - slope * t) * (ly - icpt - slope * t);
    const double rms = std::sqrt(ss / n);
    if (rms > max_rms) {
        std::ostringstream os;
        os << "ringdown_rate: log-amplitude residual rms " << rms << " exceeds " << max_rms;
        throw PoorFitError(os.str());
    }
    return -slope;
}

}  // namespace bae

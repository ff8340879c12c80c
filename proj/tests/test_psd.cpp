#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bae/errors.hpp"
#include "bae/simdyn.hpp"

using namespace bae;

namespace {

std::vector<double> white(size_t n, double sigma, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0, sigma);
    std::vector<double> x(n);
    for (auto& v : x) v = nd(rng);
    return x;
}

}  // namespace

TEST_CASE("white noise reads variance times dt") {
    const double dt = 0.01;
    auto x = white(1 << 18, 2.0, 1);
    PsdEstimate e = estimate_psd(x, dt, 1024);
    double m = 0;
    for (size_t j = 1; j + 1 < e.psd.size(); ++j) m += e.psd[j];
    m /= e.psd.size() - 2;
    CHECK(m == doctest::Approx(4.0 * dt).epsilon(0.01));
    CHECK(e.segments == 511);
    CHECK(e.rel_error == doctest::Approx(1 / std::sqrt(511.0)));
    CHECK(e.omega[1] == doctest::Approx(2 * pi / (1024 * dt)));
    CHECK(e.omega.back() == doctest::Approx(pi / dt));
}

TEST_CASE("AR(1) spectrum") {
    // x_n = a x_{n-1} + e_n has S(w) = s^2 dt/|1 - a e^{-i w dt}|^2
    const double a = 0.9, dt = 1.0;
    auto e = white(1 << 19, 1.0, 2);
    std::vector<double> x(e.size());
    double prev = 0;
    for (size_t i = 0; i < e.size(); ++i) x[i] = prev = a * prev + e[i];
    PsdEstimate est = estimate_psd(x, dt, 512);
    double worst = 0;
    for (size_t j = 2; j < est.psd.size(); j += 8) {
        double w = est.omega[j];
        double want = dt / std::norm(1.0 - a * std::polar(1.0, -w * dt));
        worst = std::max(worst, std::abs(est.psd[j] / want - 1));
    }
    // 2047 segments, about 3% per bin, plus Hann leakage at the peak
    CHECK(worst < 0.15);
}

TEST_CASE("tone lands in the right bin") {
    const double dt = 0.1, w0 = 2 * pi * 37 / (256 * dt);
    std::vector<double> x(256 * 20);
    for (size_t i = 0; i < x.size(); ++i) x[i] = std::cos(w0 * i * dt);
    PsdEstimate e = estimate_psd(x, dt, 256);
    size_t best = std::max_element(e.psd.begin(), e.psd.end()) - e.psd.begin();
    CHECK(best == 37);
}

TEST_CASE("too few segments") {
    std::vector<double> x(1000, 1.0);
    CHECK_THROWS_AS(estimate_psd(x, 1, 512), InsufficientDataError);
    CHECK_THROWS_AS(estimate_psd(x, 1, 2), ValidationError);
    CHECK_THROWS_AS(estimate_psd(x, 1, 64, 1.0), ValidationError);
}

TEST_CASE("ringdown fit") {
    TimeSeries s;
    for (int i = 0; i <= 100; ++i) {
        s.times.push_back(i * 0.1);
        s.b.push_back(std::polar(3 * std::exp(-0.25 * i * 0.1), 0.7 * i));
    }
    CHECK(ringdown_rate(s, 0, 10) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK_THROWS_AS(ringdown_rate(s, 20, 30), InsufficientDataError);
    for (int i = 0; i <= 100; i += 2) s.b[i] *= 5.0;
    CHECK_THROWS_AS(ringdown_rate(s, 0, 10), PoorFitError);
}

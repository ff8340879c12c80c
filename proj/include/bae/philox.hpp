#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace bae {

// Philox4x32-10 (Salmon, Moraes, Dror, Shaw 2011). Stateless: the same
// (counter, key) always maps to the same four words, on any platform.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter apply(Counter c, Key k) {
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                k[0] += 0x9E3779B9u;
                k[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = std::uint64_t(0xD2511F53u) * c[0];
            const std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * c[2];
            c = {std::uint32_t(p1 >> 32) ^ c[1] ^ k[0], std::uint32_t(p1),
                 std::uint32_t(p0 >> 32) ^ c[3] ^ k[1], std::uint32_t(p0)};
        }
        return c;
    }
};

// Uniform in (0, 1), never 0 or 1.
inline double to_unit(std::uint32_t x) { return (double(x) + 0.5) * 0x1p-32; }

// Standard normals keyed by (seed, step, draw). Four normals per block.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed)
        : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)} {}

    // normals number 4*draw .. 4*draw+3 of this step
    std::array<double, 4> block(std::uint64_t step, std::uint32_t draw) const {
        auto w = Philox4x32::apply({std::uint32_t(step), std::uint32_t(step >> 32), draw, 0}, key_);
        std::array<double, 4> out;
        for (int i = 0; i < 2; ++i) {
            double r = std::sqrt(-2.0 * std::log(to_unit(w[2 * i])));
            double a = 2 * 3.14159265358979323846 * to_unit(w[2 * i + 1]);
            out[2 * i] = r * std::cos(a);
            out[2 * i + 1] = r * std::sin(a);
        }
        return out;
    }

private:
    Philox4x32::Key key_;
};

}  // namespace bae

#pragma once

// Deterministic random source. All sampling goes through this wrapper so
// trajectories and training runs are reproducible bit-for-bit on a platform:
// the standard distributions are implementation-defined, so uniform and
// gaussian draws are generated by hand from raw mt19937_64 output.

#include <cstdint>
#include <random>

#include "davenport/quaternion.hpp"

namespace davenport {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a stream index.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream + 0x632be59bd9b4e019ull));
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform angle in (-pi, pi].
    double uniform_angle() { return kPi - 2.0 * kPi * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t integer(std::uint64_t n) { return gen_() % n; }

    /// Standard normal via Box-Muller (one value per pair of draws).
    double gaussian() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    Vec3 gaussian3() {
        const double a = gaussian();
        const double b = gaussian();
        const double c = gaussian();
        return {a, b, c};
    }

  private:
    std::mt19937_64 gen_;
};

/// Uniform random rotation: normalized 4D gaussian, canonicalized.
inline UnitQuaternion uniform_rotation(Rng& rng) {
    while (true) {
        const double w = rng.gaussian();
        const double x = rng.gaussian();
        const double y = rng.gaussian();
        const double z = rng.gaussian();
        const double n2 = w * w + x * x + y * y + z * z;
        if (n2 > 1e-12) {
            return UnitQuaternion::from_components(w, x, y, z);
        }
    }
}

}  // namespace davenport

#ifndef ISAC_RNG_HPP
#define ISAC_RNG_HPP

#include <complex>
#include <cstdint>
#include <random>

namespace isac {

/// Deterministic random source used everywhere in the simulator.
///
/// Built on std::mt19937_64, whose output sequence is fixed by the C++
/// standard, so identical seeds give identical tensors on every platform.
/// The standard *distributions* are not portable, so this class draws raw
/// 64-bit words and maps them itself:
///   - uniform doubles via 53-bit mantissa scaling,
///   - complex Gaussians via the Box-Muller transform,
///   - bounded integers via rejection-free 128-bit multiply-shift.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform index in [0, n). n must be >= 1.
    std::size_t index(std::size_t n) {
        using u128 = unsigned __int128;
        return static_cast<std::size_t>((u128(next_u64()) * u128(n)) >> 64);
    }

    /// Standard circular complex Gaussian with E[|w|^2] = 1
    /// (each component N(0, 1/2)), via Box-Muller.
    std::complex<double> complex_gaussian() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-std::log(u1)); // sqrt(2 * (1/2) * -log(u1))
        const double phi = 2.0 * 3.141592653589793238462643383279502884 * u2;
        return {r * std::cos(phi), r * std::sin(phi)};
    }

    /// Derives an independent stream for (seed, purpose, index) using
    /// splitmix64 finalizers, so e.g. each source's symbol stream and the
    /// noise stream are decoupled and order-independent.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t purpose,
                                std::uint64_t index = 0) {
        std::uint64_t z = seed;
        z = mix(z + 0x9e3779b97f4a7c15ULL * (purpose + 1));
        z = mix(z + 0x9e3779b97f4a7c15ULL * (index + 1));
        return z;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::mt19937_64 gen_;
};

} // namespace isac

#endif

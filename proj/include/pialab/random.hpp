#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace pialab {

/// Stateless counter-based generator: every draw is a pure function of
/// (seed, stream, key...), so results do not depend on evaluation order or
/// thread schedule. Mixing is the splitmix64 finalizer applied per word.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : base_(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ULL))) {}

    [[nodiscard]] std::uint64_t bits(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0,
                                     std::uint64_t d = 0) const {
        std::uint64_t h = base_;
        h = mix(h ^ (a + 0x632be59bd9b4e019ULL));
        h = mix(h ^ (b + 0x8cb92ba72f3d8dd7ULL));
        h = mix(h ^ (c + 0xd6e8feb86659fd93ULL));
        h = mix(h ^ (d + 0xa0761d6478bd642fULL));
        return h;
    }

    /// Uniform on the open interval (0, 1).
    [[nodiscard]] double uniform(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0,
                                 std::uint64_t d = 0) const {
        return (static_cast<double>(bits(a, b, c, d) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform on (-1, 1).
    [[nodiscard]] double symmetric(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
        return 2.0 * uniform(a, b, c, 0) - 1.0;
    }

    /// Standard normal by Box-Muller on two keyed uniforms.
    [[nodiscard]] double normal(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
        const double u1 = uniform(a, b, c, 1);
        const double u2 = uniform(a, b, c, 2);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t base_;
};

} // namespace pialab

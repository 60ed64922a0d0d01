#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace spdelab {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Independent uses of the generator get disjoint counter spaces.
enum class Stream : std::uint32_t {
    GaussianSample = 1,
    Quadrature = 2,
    Noise = 3,
    Mollify = 4,
    Probe = 5,
    InitialState = 6,
    Test = 99,
};

// Counter-based generator: every draw is a pure function of (seed, stream, a, b, c),
// so results never depend on how work is split across threads.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Two uniforms in [0, 1) with 53-bit resolution.
    std::pair<double, double> uniform_pair(Stream s, std::uint32_t a, std::uint32_t b,
                                           std::uint32_t c) const;

    /// Two independent standard normals (Box-Muller on one Philox block).
    std::pair<double, double> normal_pair(Stream s, std::uint32_t a, std::uint32_t b,
                                          std::uint32_t c) const;

    double normal(Stream s, std::uint32_t a, std::uint32_t b, std::uint32_t c) const {
        return normal_pair(s, a, b, c).first;
    }

private:
    std::uint64_t seed_;
};

}  // namespace spdelab

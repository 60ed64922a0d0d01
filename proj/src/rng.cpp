#include "spdelab/rng.hpp"

#include <cmath>
#include <numbers>

namespace spdelab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
    return static_cast<double>(bits & ((std::uint64_t{1} << 53) - 1)) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

std::pair<double, double> CounterRng::uniform_pair(Stream s, std::uint32_t a, std::uint32_t b,
                                                   std::uint32_t c) const {
    const auto out = philox4x32({static_cast<std::uint32_t>(s), a, b, c},
                                {static_cast<std::uint32_t>(seed_),
                                 static_cast<std::uint32_t>(seed_ >> 32)});
    return {to_unit(out[0], out[1]), to_unit(out[2], out[3])};
}

std::pair<double, double> CounterRng::normal_pair(Stream s, std::uint32_t a, std::uint32_t b,
                                                  std::uint32_t c) const {
    const auto [u0, u1] = uniform_pair(s, a, b, c);
    const double r = std::sqrt(-2.0 * std::log1p(-u0));  // 1 - u0 in (0, 1]
    const double angle = 2.0 * std::numbers::pi * u1;
    return {r * std::cos(angle), r * std::sin(angle)};
}

}  // namespace spdelab

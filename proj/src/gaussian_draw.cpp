#include "simlmc/gaussian_draw.hpp"

#include <cmath>
#include <numbers>

namespace simlmc::field {

namespace {

constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;
constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kPhiloxM0, ctr[0], lo0, hi0);
        mulhilo(kPhiloxM1, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

double standard_normal(std::uint64_t master_seed, std::uint64_t sample_id, std::uint32_t field, std::uint32_t mode) {
    const auto r = philox4x32({static_cast<std::uint32_t>(sample_id), static_cast<std::uint32_t>(sample_id >> 32),
                               field, mode},
                              {static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)});
    const std::uint64_t a = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
    const std::uint64_t b = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
    constexpr double kUnit = 1.0 / 9007199254740992.0;  // 2^-53
    const double u1 = static_cast<double>((a >> 11) + 1) * kUnit;  // (0, 1]
    const double u2 = static_cast<double>(b >> 11) * kUnit;        // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

GaussianDraw draw(std::uint64_t master_seed, std::uint64_t sample_id, std::size_t modes) {
    GaussianDraw d;
    d.master_seed = master_seed;
    d.sample_id = sample_id;
    d.modes = modes;
    d.xi.resize(kGermFieldCount * modes);
    for (std::size_t f = 0; f < kGermFieldCount; ++f) {
        for (std::size_t k = 0; k < modes; ++k) {
            d.xi[f * modes + k] =
                standard_normal(master_seed, sample_id, static_cast<std::uint32_t>(f), static_cast<std::uint32_t>(k));
        }
    }
    return d;
}

}  // namespace simlmc::field

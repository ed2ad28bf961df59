#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace simlmc::field {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Six germ fields drive one 3x3 upper-triangular fluctuation factor.
inline constexpr std::size_t kGermFieldCount = 6;

/// Standard normal keyed by (seed, sample, field, mode); a pure function.
double standard_normal(std::uint64_t master_seed, std::uint64_t sample_id, std::uint32_t field,
                       std::uint32_t mode);

/// kGermFieldCount x modes standard normal KLE coefficients of one sample.
struct GaussianDraw {
    std::uint64_t master_seed = 0;
    std::uint64_t sample_id = 0;
    std::size_t modes = 0;
    std::vector<double> xi;  // row-major, field-major

    std::span<const double> row(std::size_t field) const {
        return std::span<const double>(xi).subspan(field * modes, modes);
    }
};

GaussianDraw draw(std::uint64_t master_seed, std::uint64_t sample_id, std::size_t modes);

}  // namespace simlmc::field

#pragma once

#include <array>
#include <cstdint>

namespace simlmc::stats {

/// Error-free accumulator of doubles: a fixed-point superaccumulator spanning
/// the whole double exponent range in 32-bit limbs. The sum is exact, so the
/// result does not depend on the order of additions or on how partial sums
/// are merged; value() rounds once at the end.
class ExactSum {
public:
    void add(double v);
    ExactSum& operator+=(const ExactSum& other);

    double value() const;
    bool operator==(const ExactSum& other) const;

private:
    static constexpr int kLimbBits = 32;
    static constexpr std::size_t kLimbs = 67;
    void normalize();

    std::array<std::int64_t, kLimbs> limbs_{};
    std::uint32_t pending_ = 0;
    bool non_finite_ = false;
};

}  // namespace simlmc::stats

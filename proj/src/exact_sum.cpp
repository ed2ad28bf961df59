#include "simlmc/exact_sum.hpp"

#include <bit>
#include <cmath>
#include <limits>

namespace simlmc::stats {

namespace {

// Adds per limb stay below 2^33 in magnitude, so 2^29 adds cannot overflow.
constexpr std::uint32_t kNormalizeEvery = 1u << 29;

}  // namespace

void ExactSum::add(double v) {
    if (!std::isfinite(v)) {
        non_finite_ = true;
        return;
    }
    if (v == 0.0) return;
    const auto bits = std::bit_cast<std::uint64_t>(v);
    const bool negative = (bits >> 63) != 0;
    const auto biased_exp = static_cast<int>((bits >> 52) & 0x7ff);
    std::uint64_t mant = bits & ((std::uint64_t{1} << 52) - 1);
    int pos = 0;  // v = mant * 2^(pos - 1074)
    if (biased_exp == 0) {
        pos = 0;
    } else {
        mant |= std::uint64_t{1} << 52;
        pos = biased_exp - 1;
    }
    const std::size_t limb = static_cast<std::size_t>(pos / kLimbBits);
    const int offset = pos % kLimbBits;
    // mant < 2^53 and offset < 32, so the shifted mantissa spans at most three limbs.
    const std::uint64_t lo = mant << offset;
    const std::uint64_t hi = offset == 0 ? 0 : mant >> (64 - offset);
    const auto part0 = static_cast<std::int64_t>(lo & 0xffffffffu);
    const auto part1 = static_cast<std::int64_t>(lo >> 32);
    const auto part2 = static_cast<std::int64_t>(hi);
    if (negative) {
        limbs_[limb] -= part0;
        limbs_[limb + 1] -= part1;
        limbs_[limb + 2] -= part2;
    } else {
        limbs_[limb] += part0;
        limbs_[limb + 1] += part1;
        limbs_[limb + 2] += part2;
    }
    if (++pending_ >= kNormalizeEvery) normalize();
}

ExactSum& ExactSum::operator+=(const ExactSum& other) {
    if (pending_ + other.pending_ + 2 >= kNormalizeEvery) normalize();
    ExactSum rhs = other;
    rhs.normalize();
    for (std::size_t i = 0; i < kLimbs; ++i) limbs_[i] += rhs.limbs_[i];
    pending_ += 2;
    non_finite_ = non_finite_ || other.non_finite_;
    return *this;
}

void ExactSum::normalize() {
    for (std::size_t i = 0; i + 1 < kLimbs; ++i) {
        const std::int64_t carry = limbs_[i] >> kLimbBits;  // arithmetic shift = floor division
        limbs_[i] -= carry * (std::int64_t{1} << kLimbBits);
        limbs_[i + 1] += carry;
    }
    pending_ = 0;
}

double ExactSum::value() const {
    if (non_finite_) return std::numeric_limits<double>::quiet_NaN();
    ExactSum c = *this;
    c.normalize();
    double sign = 1.0;
    if (c.limbs_[kLimbs - 1] < 0) {
        for (auto& l : c.limbs_) l = -l;
        c.normalize();
        sign = -1.0;
    }
    std::size_t top = kLimbs;
    while (top > 0 && c.limbs_[top - 1] == 0) --top;
    if (top == 0) return 0.0;
    const std::size_t hi = top - 1;
    const std::size_t lo = hi >= 2 ? hi - 2 : 0;
    long double acc = 0.0L;
    for (std::size_t i = lo; i <= hi; ++i) {
        acc += std::ldexp(static_cast<long double>(c.limbs_[i]), static_cast<int>(i) * kLimbBits - 1074);
    }
    // Sticky contribution of the remaining low limbs.
    if (lo > 0) {
        bool any = false;
        for (std::size_t i = 0; i < lo; ++i) any = any || c.limbs_[i] != 0;
        if (any) acc += std::ldexp(0.5L, static_cast<int>(lo) * kLimbBits - 1074);
    }
    return sign * static_cast<double>(acc);
}

bool ExactSum::operator==(const ExactSum& other) const {
    if (non_finite_ != other.non_finite_) return false;
    ExactSum a = *this, b = other;
    a.normalize();
    b.normalize();
    return a.limbs_ == b.limbs_;
}

}  // namespace simlmc::stats

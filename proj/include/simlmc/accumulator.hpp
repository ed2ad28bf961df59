#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "simlmc/exact_sum.hpp"
#include "simlmc/hstats.hpp"

namespace simlmc::stats {

/// Per-node statistics of one level (cm, cm^2, cm^4).
struct NodeStats {
    double mean_fine = 0.0;  // mean of u_l
    double mean_Y = 0.0;     // mean of u_l - u_{l-1}; mean of u_0 at level 0
    double V = 0.0;          // h2 of Y
    double Z = 0.0;          // h2(u_l) - h2(u_{l-1}); h2(u_0) at level 0
    double V2 = 0.0;         // n Var(Z estimate); NaN while n < 4
    double h2_fine = 0.0;    // h2(u_l)
};

/// Mergeable power-sum accumulator of one level.
///
/// Samples are shifted by a fixed per-node vector before summation, which
/// keeps the raw sums well conditioned; every statistic except the means is
/// shift invariant and the means add the shift back. Coupled levels store
/// sums of D = u_l - u_{l-1} and S = u_l + u_{l-1} rather than of u_l and
/// u_{l-1}: h2(u_l) - h2(u_{l-1}) is the sample covariance of D and S, which
/// keeps its accuracy when the two levels nearly agree.
///
/// Sums are exact, so merging and reordering give bitwise identical results.
class LevelAccumulator {
public:
    LevelAccumulator() = default;
    LevelAccumulator(int level, bool coupled, std::vector<double> shift);

    // `coarse` must be empty for an uncoupled accumulator and match `fine` otherwise.
    void accumulate(std::span<const double> fine, std::span<const double> coarse, double cost);
    // Throws unless both have the same level, coupling and shift.
    void merge(const LevelAccumulator& other);

    int level() const noexcept { return level_; }
    bool coupled() const noexcept { return coupled_; }
    std::uint64_t n() const noexcept { return n_; }
    std::size_t node_count() const noexcept { return shift_.size(); }
    const std::vector<double>& shift() const noexcept { return shift_; }
    double cost_sum() const { return cost_.value(); }
    double mean_cost() const;

    NodeStats node_stats(std::size_t node) const;
    std::vector<NodeStats> stats() const;

    // Shifted sums of the fine QoI at one node.
    UnivariateSums fine_sums(std::size_t node) const;
    // Shifted sums of (D, S) at one node; coupled accumulators only.
    BivariateSums difference_sums(std::size_t node) const;

    bool operator==(const LevelAccumulator& other) const;

private:
    // Uncoupled: x1..x4 of u - shift. Coupled: d1..d4, s1..s4, ds, d2s, ds2, d2s2.
    static constexpr std::size_t kSums = 12;
    std::size_t sums_per_node() const noexcept { return coupled_ ? kSums : 4; }

    int level_ = 0;
    bool coupled_ = false;
    std::uint64_t n_ = 0;
    std::vector<double> shift_;
    std::vector<ExactSum> sums_;
    ExactSum cost_;
};

}  // namespace simlmc::stats

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace simlmc::mlmc {

enum class Estimand { mean, variance };
std::string to_string(Estimand e);

// h2 needs two samples; fourth-order estimates need four.
constexpr std::uint64_t min_samples(Estimand e) { return e == Estimand::mean ? 2 : 4; }

struct AllocationPlan {
    std::vector<std::uint64_t> N;
    double predicted_cost = 0.0;  // sum N_l C_l
    Estimand estimand = Estimand::mean;
};

/// Cost-optimal sample counts for sum_l W_l / N_l <= target:
///   N_l = ceil(sqrt(W_l / C_l) * sum_k sqrt(W_k C_k) / target), at least min_n.
/// The ceiling ignores a relative excess of 1e-10 so that values that are
/// integers up to rounding stay put. All W_l = 0 gives min_n everywhere.
AllocationPlan allocate(std::span<const double> W, std::span<const double> C, double target, std::uint64_t min_n,
                        Estimand estimand = Estimand::mean);

/// One plan per node (W[level][node]); each level takes the largest count over nodes.
AllocationPlan allocate_nodes(const std::vector<std::vector<double>>& W, std::span<const double> C, double target,
                              std::uint64_t min_n, Estimand estimand = Estimand::mean);

double plan_cost(std::span<const std::uint64_t> N, std::span<const double> C);

}  // namespace simlmc::mlmc

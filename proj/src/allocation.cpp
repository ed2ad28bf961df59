#include "simlmc/allocation.hpp"

#include <algorithm>
#include <cmath>

#include "simlmc/error.hpp"
#include "simlmc/problem.hpp"

namespace simlmc::mlmc {

std::string to_string(Estimand e) { return e == Estimand::mean ? "mean" : "variance"; }

namespace {

void check_inputs(std::span<const double> C, double target) {
    if (C.empty()) throw Error("allocation needs at least one level");
    if (!(target > 0.0) || !std::isfinite(target)) throw Error("allocation target must be positive");
    for (double c : C) {
        if (!(c > 0.0) || !std::isfinite(c)) throw Error("allocation costs must be positive");
    }
}

std::uint64_t slack_ceil(double x) {
    if (!std::isfinite(x)) throw Error("allocation produced a non-finite sample count");
    const double v = std::ceil(x * (1.0 - 1e-10));
    if (v >= static_cast<double>(kMaxSampleIndex)) throw Error("allocation exceeds the sample index range");
    return static_cast<std::uint64_t>(std::max(v, 0.0));
}

}  // namespace

double plan_cost(std::span<const std::uint64_t> N, std::span<const double> C) {
    double cost = 0.0;
    for (std::size_t l = 0; l < N.size() && l < C.size(); ++l) cost += static_cast<double>(N[l]) * C[l];
    return cost;
}

AllocationPlan allocate(std::span<const double> W, std::span<const double> C, double target, std::uint64_t min_n,
                        Estimand estimand) {
    check_inputs(C, target);
    if (W.size() != C.size()) throw Error("allocation: W and C differ in length");
    double total = 0.0;
    for (std::size_t l = 0; l < W.size(); ++l) {
        if (!(W[l] >= 0.0) || !std::isfinite(W[l])) throw Error("allocation variances must be finite and non-negative");
        total += std::sqrt(W[l] * C[l]);
    }
    AllocationPlan plan;
    plan.estimand = estimand;
    plan.N.resize(W.size());
    for (std::size_t l = 0; l < W.size(); ++l) {
        const double n = std::sqrt(W[l] / C[l]) * total / target;
        plan.N[l] = std::max(slack_ceil(n), min_n);
    }
    plan.predicted_cost = plan_cost(plan.N, C);
    return plan;
}

AllocationPlan allocate_nodes(const std::vector<std::vector<double>>& W, std::span<const double> C, double target,
                              std::uint64_t min_n, Estimand estimand) {
    check_inputs(C, target);
    if (W.size() != C.size()) throw Error("allocation: W and C differ in length");
    const std::size_t nodes = W.front().size();
    AllocationPlan plan;
    plan.estimand = estimand;
    plan.N.assign(W.size(), min_n);
    std::vector<double> w(W.size());
    for (std::size_t i = 0; i < nodes; ++i) {
        for (std::size_t l = 0; l < W.size(); ++l) {
            if (W[l].size() != nodes) throw Error("allocation: node counts differ between levels");
            w[l] = W[l][i];
        }
        const auto p = allocate(w, C, target, min_n, estimand);
        for (std::size_t l = 0; l < W.size(); ++l) plan.N[l] = std::max(plan.N[l], p.N[l]);
    }
    plan.predicted_cost = plan_cost(plan.N, C);
    return plan;
}

}  // namespace simlmc::mlmc

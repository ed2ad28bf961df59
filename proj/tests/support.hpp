#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "simlmc/gaussian_draw.hpp"
#include "simlmc/problem.hpp"

namespace simlmc::testing {

// Closed-form multilevel problem: node i on level l gives
//   u_l = m_i + s_i z_0 + sum_{k=1..l} a 4^-k w_i (1 + z_k)
// with z_k standard normals keyed by the sample id. Y_l has mean a 4^-l w_i
// and variance (a 4^-l w_i)^2; work grows 4x per level.
class SyntheticProblem : public mlmc::SamplingProblem {
public:
    SyntheticProblem(int levels, std::uint64_t seed, double a = 0.5, double scale = 1.0)
        : levels_(levels), seed_(seed), a_(a), scale_(scale) {}

    int max_level() const override { return levels_; }
    std::size_t qoi_size() const override { return 5; }
    std::vector<double> evaluate(int level, std::uint64_t id) const override {
        std::vector<double> u(qoi_size());
        std::vector<double> z(static_cast<std::size_t>(level) + 1);
        for (std::size_t k = 0; k < z.size(); ++k) {
            z[k] = field::standard_normal(seed_, id, 0, static_cast<std::uint32_t>(k));
        }
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double m = 1.0 + 0.25 * static_cast<double>(i);
            const double s = 0.1 * (1.0 + 0.1 * static_cast<double>(i));
            const double w = 1.0 + 0.05 * static_cast<double>(i);
            double v = m + s * z[0];
            for (int k = 1; k <= level; ++k) v += a_ * std::pow(4.0, -k) * w * (1.0 + z[static_cast<std::size_t>(k)]);
            u[i] = scale_ * v;
        }
        return u;
    }
    double mesh_size(int level) const override { return std::ldexp(1.0, -level); }
    double work(int level) const override { return std::pow(4.0, level); }

private:
    int levels_;
    std::uint64_t seed_;
    double a_;
    double scale_;
};

// Cheapest integer allocation with sum W_l / N_l <= target and min_n <= N_l <= max_n,
// by exhaustive search over all but the last level (which is then the smallest
// feasible count). Up to three levels. Returns infinity when nothing is feasible.
inline double grid_min_cost(std::span<const double> W, std::span<const double> C, double target, std::uint64_t min_n,
                            std::uint64_t max_n) {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t L = W.size();
    auto last = [&](double budget, double cost_so_far) {
        if (!(budget > 0.0)) return;
        double n = std::ceil(W[L - 1] / budget);
        // Guard the ceiling against rounding in the budget.
        while (n > static_cast<double>(min_n) && W[L - 1] / (n - 1.0) <= budget) n -= 1.0;
        while (W[L - 1] / n > budget) n += 1.0;
        n = std::max(n, static_cast<double>(min_n));
        if (n <= static_cast<double>(max_n)) best = std::min(best, cost_so_far + n * C[L - 1]);
    };
    if (L == 1) {
        last(target, 0.0);
    } else if (L == 2) {
        for (std::uint64_t a = min_n; a <= max_n; ++a) last(target - W[0] / static_cast<double>(a), static_cast<double>(a) * C[0]);
    } else {
        for (std::uint64_t a = min_n; a <= max_n; ++a)
            for (std::uint64_t b = min_n; b <= max_n; ++b)
                last(target - W[0] / static_cast<double>(a) - W[1] / static_cast<double>(b),
                     static_cast<double>(a) * C[0] + static_cast<double>(b) * C[1]);
    }
    return best;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace simlmc::testing

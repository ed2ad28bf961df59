#pragma once

#include <cstdint>
#include <vector>

#include "simlmc/accumulator.hpp"
#include "simlmc/problem.hpp"

namespace simlmc::mlmc {

enum class CostModel { wallclock, work };

struct SamplerOptions {
    std::uint32_t stream = kStreamMlmc;
    unsigned threads = 1;
    CostModel cost_model = CostModel::wallclock;
};

/// Growing sample sets of an estimator, one accumulator per estimator level.
/// Estimator level k holds samples with indices 0..n_k-1 of problem level
/// level(k) in the sampler's stream; coupled levels also evaluate the next
/// coarser problem level with the same sample id. Extending a level appends
/// new indices, so results do not depend on how a run is split into steps or
/// on the thread count (sums are exact).
class MultilevelSampler {
public:
    // Levels 0..max_level, level k >= 1 coupled with k - 1.
    MultilevelSampler(const SamplingProblem& problem, SamplerOptions options);
    // Plain Monte Carlo on one problem level.
    static MultilevelSampler single_level(const SamplingProblem& problem, int level, SamplerOptions options);

    std::size_t level_count() const noexcept { return levels_.size(); }
    int problem_level(std::size_t k) const { return levels_.at(k); }
    double mesh_size(std::size_t k) const { return problem_.mesh_size(levels_.at(k)); }
    const stats::LevelAccumulator& accumulator(std::size_t k) const { return acc_.at(k); }
    const std::vector<stats::LevelAccumulator>& accumulators() const noexcept { return acc_; }
    std::vector<std::uint64_t> counts() const;
    // Mean cost of one (coupled) sample per estimator level.
    std::vector<double> mean_costs() const;
    double total_cost() const;
    // PDE evaluations performed so far.
    std::uint64_t evaluations() const noexcept { return evaluations_; }
    const SamplerOptions& options() const noexcept { return options_; }

    // Draw samples until level k holds n of them (no-op if it already does).
    void extend(std::size_t k, std::uint64_t n);

private:
    MultilevelSampler(const SamplingProblem& problem, std::vector<int> levels, bool coupled, SamplerOptions options);
    std::vector<double> evaluate(int level, std::uint64_t id);
    void sample_range(std::size_t k, std::uint64_t begin, std::uint64_t end, stats::LevelAccumulator& acc,
                      std::uint64_t& evaluations);

    const SamplingProblem& problem_;
    SamplerOptions options_;
    std::vector<int> levels_;
    std::vector<stats::LevelAccumulator> acc_;
    std::uint64_t first_id_ = 0;
    std::vector<double> first_;  // QoI of the first sample of estimator level 0; also the shift
    std::uint64_t evaluations_ = 0;
};

}  // namespace simlmc::mlmc

#include "simlmc/sampler.hpp"

#include <chrono>
#include <exception>
#include <thread>

#include "simlmc/error.hpp"

namespace simlmc::mlmc {

MultilevelSampler::MultilevelSampler(const SamplingProblem& problem, SamplerOptions options)
    : MultilevelSampler(problem, {}, true, options) {}

MultilevelSampler MultilevelSampler::single_level(const SamplingProblem& problem, int level, SamplerOptions options) {
    if (level < 0 || level > problem.max_level()) throw Error("level " + std::to_string(level) + " not in problem");
    return MultilevelSampler(problem, {level}, false, options);
}

MultilevelSampler::MultilevelSampler(const SamplingProblem& problem, std::vector<int> levels, bool coupled,
                                     SamplerOptions options)
    : problem_(problem), options_(options), levels_(std::move(levels)) {
    if (options_.threads == 0) options_.threads = 1;
    if (levels_.empty()) {
        for (int l = 0; l <= problem.max_level(); ++l) levels_.push_back(l);
    }
    first_id_ = sample_id(levels_.front(), options_.stream, 0);
    first_ = problem_.evaluate(levels_.front(), first_id_);
    ++evaluations_;
    if (first_.size() != problem_.qoi_size()) throw Error("problem returned a QoI of unexpected length");
    for (std::size_t k = 0; k < levels_.size(); ++k) {
        acc_.emplace_back(levels_[k], coupled && k > 0, first_);
    }
    // The first sample is already evaluated; charge it when level 0 is extended.
    evaluations_ = 0;
}

std::vector<std::uint64_t> MultilevelSampler::counts() const {
    std::vector<std::uint64_t> n;
    for (const auto& a : acc_) n.push_back(a.n());
    return n;
}

std::vector<double> MultilevelSampler::mean_costs() const {
    std::vector<double> c;
    for (const auto& a : acc_) c.push_back(a.mean_cost());
    return c;
}

double MultilevelSampler::total_cost() const {
    double c = 0.0;
    for (const auto& a : acc_) c += a.cost_sum();
    return c;
}

std::vector<double> MultilevelSampler::evaluate(int level, std::uint64_t id) {
    if (id == first_id_) return first_;
    return problem_.evaluate(level, id);
}

void MultilevelSampler::sample_range(std::size_t k, std::uint64_t begin, std::uint64_t end,
                                     stats::LevelAccumulator& acc, std::uint64_t& evaluations) {
    using clock = std::chrono::steady_clock;
    const int level = levels_[k];
    const bool coupled = acc.coupled();
    for (std::uint64_t i = begin; i < end; ++i) {
        const auto id = sample_id(level, options_.stream, i);
        const auto start = clock::now();
        const auto fine = evaluate(level, id);
        std::vector<double> coarse;
        if (coupled) coarse = evaluate(level - 1, id);
        const double seconds = std::chrono::duration<double>(clock::now() - start).count();
        double cost = seconds;
        if (options_.cost_model == CostModel::work) {
            cost = problem_.work(level) + (coupled ? problem_.work(level - 1) : 0.0);
        }
        acc.accumulate(fine, coarse, cost);
        evaluations += coupled ? 2 : 1;
    }
}

void MultilevelSampler::extend(std::size_t k, std::uint64_t n) {
    auto& target = acc_.at(k);
    const std::uint64_t begin = target.n();
    if (n <= begin) return;
    const std::uint64_t count = n - begin;
    const auto threads = static_cast<std::uint64_t>(std::min<std::uint64_t>(options_.threads, count));
    if (threads <= 1) {
        sample_range(k, begin, n, target, evaluations_);
        return;
    }
    std::vector<stats::LevelAccumulator> parts(threads, stats::LevelAccumulator(target.level(), target.coupled(), first_));
    std::vector<std::uint64_t> evals(threads, 0);
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (std::uint64_t t = 0; t < threads; ++t) {
        const std::uint64_t b = begin + count * t / threads;
        const std::uint64_t e = begin + count * (t + 1) / threads;
        pool.emplace_back([&, t, b, e] {
            try {
                sample_range(k, b, e, parts[t], evals[t]);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
    for (std::uint64_t t = 0; t < threads; ++t) {
        target.merge(parts[t]);
        evaluations_ += evals[t];
    }
}

}  // namespace simlmc::mlmc

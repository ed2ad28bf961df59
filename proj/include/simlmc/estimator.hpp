#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "simlmc/accumulator.hpp"
#include "simlmc/allocation.hpp"
#include "simlmc/rates.hpp"
#include "simlmc/sampler.hpp"

namespace simlmc::mlmc {

enum class Mode { mean, variance, both };

/// How sampling errors are made dimensionless.
///   spread:    kappa^2 = max h2(u), kappa_v^2 = max V2(u) on the first estimator
///              level, i.e. the squared standard error in units of the QoI's own
///              spread (a t-statistic).
///   magnitude: kappa = max |mean estimate|, kappa_v = max variance estimate.
enum class Normalization { spread, magnitude };

std::string to_string(Mode m);
std::string to_string(Normalization n);

using LevelStats = std::vector<std::vector<stats::NodeStats>>;  // [level][node]

LevelStats level_stats(const std::vector<stats::LevelAccumulator>& levels);

/// Telescoped per-node estimates: mean = sum_l mean(Y_l), variance = sum_l Z_l.
struct Estimates {
    std::vector<double> mean;
    std::vector<double> variance;
};
Estimates combine(const LevelStats& stats);

struct Normalizers {
    double kappa = 0.0;
    double kappa_v = 0.0;
};
Normalizers normalizers(const LevelStats& stats, Normalization normalization);

/// max over nodes of sum_l V_l / N_l (cm^2) and sum_l V_l2 / N_l (cm^4).
double absolute_mse_mean(const LevelStats& stats, std::span<const std::uint64_t> N);
double absolute_mse_variance(const LevelStats& stats, std::span<const std::uint64_t> N);

/// Normalized sampling MSEs: the absolute values above over kappa^2 / kappa_v^2.
/// Throws NormalizationError for a non-positive normalization constant.
double normalized_mse_mean(const LevelStats& stats, std::span<const std::uint64_t> N, double kappa);
double normalized_mse_variance(const LevelStats& stats, std::span<const std::uint64_t> N, double kappa_v);

/// Per-level maxima over nodes, mesh sizes and mean costs of the sampler's current state.
std::vector<LevelSummary> summarize(const MultilevelSampler& sampler);

/// Draws n_screen samples (at least 4) on every level of the sampler.
std::vector<LevelSummary> screening(MultilevelSampler& sampler, std::uint64_t n_screen);

struct Targets {
    double mean = 0.0;      // target normalized sampling MSE of the mean
    double variance = 0.0;  // target normalized sampling MSE of the variance
};

struct RunOptions {
    Mode mode = Mode::both;
    Normalization normalization = Normalization::spread;
    int max_iterations = 20;
    std::uint64_t n_screen = 50;
};

struct IterationRecord {
    std::size_t target_index = 0;
    int iteration = 0;
    double kappa = 0.0, kappa_v = 0.0;
    double e_s = 0.0, e_vs = 0.0;
    std::vector<std::uint64_t> N;
};

struct TargetResult {
    Targets target;
    bool converged = false;
    int iterations = 0;
    std::vector<std::uint64_t> N;           // samples per level at termination
    std::vector<std::uint64_t> N_mean;      // plan for the mean alone, final statistics
    std::vector<std::uint64_t> N_variance;  // plan for the variance alone
    double kappa = 0.0, kappa_v = 0.0;
    double e_s = 0.0, e_vs = 0.0;                   // achieved normalized MSEs
    double abs_mean = 0.0, abs_variance = 0.0;      // achieved absolute MSEs
    double plan_cost_mean = 0.0, plan_cost_variance = 0.0;  // sum_l N_l C_l of the plans
    double cost_total = 0.0;                        // cost of every sample drawn so far
    std::vector<double> costs;                      // C_l
    Estimates estimates;
};

struct RunReport {
    std::vector<LevelSummary> screening;
    std::vector<TargetResult> results;  // in the order run (loosest first)
    std::vector<IterationRecord> history;
    bool converged = false;
    std::string diagnostics;
};

/// Adaptive estimator loop on the sampler's levels: screen, then per target
/// (loosest to tightest, continuing from the same samples) re-estimate the
/// normalization, allocate per node, draw the missing samples and repeat
/// until the achieved errors meet the targets or max_iterations is hit.
RunReport run_adaptive(MultilevelSampler& sampler, std::span<const Targets> targets, const RunOptions& options);

/// MLMC over all problem levels (stream kStreamMlmc).
RunReport run_mlmc(const SamplingProblem& problem, std::span<const Targets> targets, const RunOptions& options,
                   SamplerOptions sampler_options = {});

/// Plain MC on the finest level (stream kStreamMc) with the same stopping rules.
RunReport run_mc(const SamplingProblem& problem, std::span<const Targets> targets, const RunOptions& options,
                 SamplerOptions sampler_options = {});

}  // namespace simlmc::mlmc

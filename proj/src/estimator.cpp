#include "simlmc/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "simlmc/error.hpp"
#include "simlmc/log.hpp"

namespace simlmc::mlmc {

std::string to_string(Mode m) {
    switch (m) {
        case Mode::mean: return "mean";
        case Mode::variance: return "variance";
        case Mode::both: return "both";
    }
    return "unknown";
}

std::string to_string(Normalization n) { return n == Normalization::spread ? "spread" : "magnitude"; }

LevelStats level_stats(const std::vector<stats::LevelAccumulator>& levels) {
    LevelStats out;
    for (const auto& a : levels) out.push_back(a.stats());
    return out;
}

Estimates combine(const LevelStats& stats) {
    if (stats.empty()) throw Error("no levels to combine");
    const std::size_t nodes = stats.front().size();
    Estimates e{std::vector<double>(nodes, 0.0), std::vector<double>(nodes, 0.0)};
    for (const auto& level : stats) {
        for (std::size_t i = 0; i < nodes; ++i) {
            e.mean[i] += level[i].mean_Y;
            e.variance[i] += level[i].Z;
        }
    }
    return e;
}

Normalizers normalizers(const LevelStats& stats, Normalization normalization) {
    if (stats.empty()) throw Error("no levels to normalize");
    Normalizers k;
    if (normalization == Normalization::spread) {
        double h2 = 0.0, v2 = 0.0;
        for (const auto& s : stats.front()) {
            h2 = std::max(h2, s.h2_fine);
            if (std::isfinite(s.V2)) v2 = std::max(v2, s.V2);
        }
        k.kappa = std::sqrt(h2);
        k.kappa_v = std::sqrt(v2);
        return k;
    }
    const auto e = combine(stats);
    for (std::size_t i = 0; i < e.mean.size(); ++i) {
        k.kappa = std::max(k.kappa, std::abs(e.mean[i]));
        k.kappa_v = std::max(k.kappa_v, e.variance[i]);
    }
    return k;
}

namespace {

double max_node_mse(const LevelStats& stats, std::span<const std::uint64_t> N, bool variance) {
    if (N.size() != stats.size()) throw Error("sample counts do not match the level count");
    const std::size_t nodes = stats.front().size();
    double worst = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        double sum = 0.0;
        for (std::size_t l = 0; l < stats.size(); ++l) {
            if (N[l] < 2) throw InsufficientSamplesError("sampling MSE needs N_l >= 2 on every level");
            const double v = variance ? stats[l][i].V2 : stats[l][i].V;
            if (!std::isfinite(v)) throw InsufficientSamplesError("variance sampling MSE needs N_l >= 4 on every level");
            sum += v / static_cast<double>(N[l]);
        }
        worst = std::max(worst, sum);
    }
    return worst;
}

void check_kappa(double kappa, const char* name) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw NormalizationError(std::string("normalization constant ") + name + " is not positive");
    }
}

}  // namespace

double absolute_mse_mean(const LevelStats& stats, std::span<const std::uint64_t> N) {
    return max_node_mse(stats, N, false);
}

double absolute_mse_variance(const LevelStats& stats, std::span<const std::uint64_t> N) {
    return max_node_mse(stats, N, true);
}

double normalized_mse_mean(const LevelStats& stats, std::span<const std::uint64_t> N, double kappa) {
    check_kappa(kappa, "kappa");
    return absolute_mse_mean(stats, N) / (kappa * kappa);
}

double normalized_mse_variance(const LevelStats& stats, std::span<const std::uint64_t> N, double kappa_v) {
    check_kappa(kappa_v, "kappa_v");
    return absolute_mse_variance(stats, N) / (kappa_v * kappa_v);
}

std::vector<LevelSummary> summarize(const MultilevelSampler& sampler) {
    std::vector<LevelSummary> out;
    for (std::size_t k = 0; k < sampler.level_count(); ++k) {
        const auto& acc = sampler.accumulator(k);
        LevelSummary s;
        s.level = sampler.problem_level(k);
        s.h = sampler.mesh_size(k);
        s.n = acc.n();
        s.C = acc.mean_cost();
        for (const auto& st : acc.stats()) {
            s.mean_u = std::max(s.mean_u, std::abs(st.mean_fine));
            s.h2_u = std::max(s.h2_u, st.h2_fine);
            s.mean_Y = std::max(s.mean_Y, std::abs(st.mean_Y));
            s.V = std::max(s.V, st.V);
            s.Z = std::max(s.Z, std::abs(st.Z));
            if (std::isfinite(st.V2)) s.V2 = std::max(s.V2, st.V2);
        }
        out.push_back(s);
    }
    return out;
}

std::vector<LevelSummary> screening(MultilevelSampler& sampler, std::uint64_t n_screen) {
    if (n_screen < 4) throw InsufficientSamplesError("screening needs at least 4 samples per level");
    for (std::size_t k = 0; k < sampler.level_count(); ++k) sampler.extend(k, n_screen);
    return summarize(sampler);
}

namespace {

std::vector<std::vector<double>> scaled_variances(const LevelStats& stats, bool variance, double kappa) {
    std::vector<std::vector<double>> W(stats.size());
    const double k2 = kappa * kappa;
    for (std::size_t l = 0; l < stats.size(); ++l) {
        for (const auto& s : stats[l]) W[l].push_back((variance ? s.V2 : s.V) / k2);
    }
    return W;
}

std::string format_counts(const std::vector<std::uint64_t>& n) {
    std::ostringstream out;
    for (std::size_t l = 0; l < n.size(); ++l) out << (l ? "," : "") << n[l];
    return out.str();
}

}  // namespace

RunReport run_adaptive(MultilevelSampler& sampler, std::span<const Targets> targets, const RunOptions& options) {
    if (options.max_iterations < 1) throw Error("max_iterations must be at least 1");
    const bool want_mean = options.mode != Mode::variance;
    const bool want_var = options.mode != Mode::mean;
    for (const auto& t : targets) {
        if ((want_mean && !(t.mean > 0.0)) || (want_var && !(t.variance > 0.0))) {
            throw Error("targets must be positive");
        }
    }
    RunReport report;
    report.screening = screening(sampler, options.n_screen);
    const std::size_t L = sampler.level_count();

    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
        const auto& target = targets[ti];
        TargetResult res;
        res.target = target;
        for (int it = 1; it <= options.max_iterations; ++it) {
            const auto stats = level_stats(sampler.accumulators());
            const auto kn = normalizers(stats, options.normalization);
            const auto N = sampler.counts();
            const auto C = sampler.mean_costs();
            const double e_s = want_mean ? normalized_mse_mean(stats, N, kn.kappa) : 0.0;
            const double e_vs = want_var ? normalized_mse_variance(stats, N, kn.kappa_v) : 0.0;
            report.history.push_back({ti, it, kn.kappa, kn.kappa_v, e_s, e_vs, N});
            res.iterations = it;
            const bool mean_ok = !want_mean || e_s <= target.mean;
            const bool var_ok = !want_var || e_vs <= target.variance;
            if (mean_ok && var_ok) {
                res.converged = true;
                break;
            }
            if (it == options.max_iterations) break;

            std::vector<std::uint64_t> next = N;
            auto raise = [&](const AllocationPlan& p) {
                for (std::size_t l = 0; l < L; ++l) next[l] = std::max(next[l], p.N[l]);
            };
            if (want_mean) {
                raise(allocate_nodes(scaled_variances(stats, false, kn.kappa), C, target.mean,
                                     min_samples(Estimand::mean), Estimand::mean));
            }
            if (want_var) {
                raise(allocate_nodes(scaled_variances(stats, true, kn.kappa_v), C, target.variance,
                                     min_samples(Estimand::variance), Estimand::variance));
            }
            if (next == N) {
                // The plan is already met but the estimate is not: grow every level
                // by the remaining error ratio.
                const double ratio = std::max(want_mean ? e_s / target.mean : 0.0,
                                              want_var ? e_vs / target.variance : 0.0);
                for (std::size_t l = 0; l < L; ++l) {
                    const double grown = std::ceil(static_cast<double>(N[l]) * ratio);
                    next[l] = std::max(N[l] + 1, static_cast<std::uint64_t>(grown));
                }
            }
            log::info("target " + std::to_string(ti) + " iteration " + std::to_string(it) + ": N = " +
                      format_counts(next));
            for (std::size_t l = 0; l < L; ++l) sampler.extend(l, next[l]);
        }

        const auto stats = level_stats(sampler.accumulators());
        const auto kn = normalizers(stats, options.normalization);
        res.N = sampler.counts();
        res.costs = sampler.mean_costs();
        res.kappa = kn.kappa;
        res.kappa_v = kn.kappa_v;
        res.abs_mean = absolute_mse_mean(stats, res.N);
        res.abs_variance = absolute_mse_variance(stats, res.N);
        // An estimand that was not requested may have a zero normalizer (e.g. a
        // deterministic QoI); report NaN and a minimum-sample plan for it.
        const double nan = std::numeric_limits<double>::quiet_NaN();
        res.e_s = want_mean || kn.kappa > 0.0 ? normalized_mse_mean(stats, res.N, kn.kappa) : nan;
        res.e_vs = want_var || kn.kappa_v > 0.0 ? normalized_mse_variance(stats, res.N, kn.kappa_v) : nan;
        auto plan = [&](bool variance, double kappa, double t) {
            const auto est = variance ? Estimand::variance : Estimand::mean;
            auto W = scaled_variances(stats, variance, kappa > 0.0 ? kappa : 1.0);
            if (!(kappa > 0.0)) {
                for (auto& level : W) std::fill(level.begin(), level.end(), 0.0);
            }
            return allocate_nodes(W, res.costs, t, min_samples(est), est);
        };
        const auto pm = plan(false, kn.kappa, target.mean > 0 ? target.mean : target.variance);
        const auto pv = plan(true, kn.kappa_v, target.variance > 0 ? target.variance : target.mean);
        res.N_mean = pm.N;
        res.N_variance = pv.N;
        res.plan_cost_mean = pm.predicted_cost;
        res.plan_cost_variance = pv.predicted_cost;
        res.cost_total = sampler.total_cost();
        res.estimates = combine(stats);
        const bool ok = res.converged;
        report.results.push_back(std::move(res));
        if (!ok) {
            std::ostringstream d;
            d << "no convergence after " << options.max_iterations << " iterations for target (mean "
              << target.mean << ", variance " << target.variance << ")\n";
            const auto& r = report.results.back();
            d << "achieved e_s " << r.e_s << ", e_vs " << r.e_vs << ", N = " << format_counts(r.N) << '\n';
            report.diagnostics = d.str();
            report.converged = false;
            return report;
        }
    }
    report.converged = true;
    return report;
}

RunReport run_mlmc(const SamplingProblem& problem, std::span<const Targets> targets, const RunOptions& options,
                   SamplerOptions sampler_options) {
    sampler_options.stream = kStreamMlmc;
    MultilevelSampler sampler(problem, sampler_options);
    return run_adaptive(sampler, targets, options);
}

RunReport run_mc(const SamplingProblem& problem, std::span<const Targets> targets, const RunOptions& options,
                 SamplerOptions sampler_options) {
    sampler_options.stream = kStreamMc;
    auto sampler = MultilevelSampler::single_level(problem, problem.max_level(), sampler_options);
    return run_adaptive(sampler, targets, options);
}

}  // namespace simlmc::mlmc

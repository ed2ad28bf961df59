#include <doctest.h>

#include <cmath>

#include "simlmc/error.hpp"
#include "simlmc/estimator.hpp"
#include "support.hpp"

using namespace simlmc;
using namespace simlmc::mlmc;

namespace {

SamplerOptions work_costs(unsigned threads = 1) {
    SamplerOptions o;
    o.cost_model = CostModel::work;
    o.threads = threads;
    return o;
}

RunOptions small_screen(Mode mode = Mode::both) {
    RunOptions o;
    o.mode = mode;
    o.n_screen = 20;
    return o;
}

LevelStats one_level(double V, double V2) {
    stats::NodeStats s;
    s.V = V;
    s.V2 = V2;
    return {{s}};
}

}  // namespace

TEST_CASE("normalized errors by hand") {
    const std::vector<std::uint64_t> N{100};
    CHECK(normalized_mse_mean(one_level(4.0, 0.0), N, 2.0) == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(normalized_mse_variance(one_level(0.0, 1e-8), N, 1e-3) == doctest::Approx(1e-4).epsilon(1e-14));
    CHECK_THROWS_AS(normalized_mse_mean(one_level(4.0, 0.0), N, 0.0), NormalizationError);
    const std::vector<std::uint64_t> one{1};
    CHECK_THROWS_AS(absolute_mse_mean(one_level(4.0, 0.0), one), InsufficientSamplesError);
}

TEST_CASE("doubling every sample count halves the errors") {
    testing::SyntheticProblem p(3, 1);
    MultilevelSampler s(p, work_costs());
    screening(s, 40);
    const auto st = level_stats(s.accumulators());
    std::vector<std::uint64_t> N{1000, 300, 80, 20}, N2;
    for (auto n : N) N2.push_back(2 * n);
    CHECK(absolute_mse_mean(st, N2) == 0.5 * absolute_mse_mean(st, N));
    CHECK(absolute_mse_variance(st, N2) == 0.5 * absolute_mse_variance(st, N));
    // More samples never increase the error at fixed statistics.
    double last = INFINITY;
    for (std::uint64_t k = 1; k < 20; ++k) {
        const std::vector<std::uint64_t> n{10 * k, 5 * k, 3 * k, 2 * k};
        const double e = absolute_mse_mean(st, n);
        CHECK(e <= last);
        last = e;
    }
}

TEST_CASE("screening on four levels costs 350 solves") {
    testing::SyntheticProblem p(3, 2);
    MultilevelSampler s(p, work_costs());
    const auto summary = screening(s, 50);
    CHECK(s.evaluations() == 350);
    CHECK(summary.size() == 4);
    CHECK(s.counts() == std::vector<std::uint64_t>{50, 50, 50, 50});
    for (std::size_t l = 1; l < 4; ++l) CHECK(summary[l].V < summary[l - 1].V);
    CHECK(summary[3].C == 64.0 + 16.0);
    CHECK_THROWS_AS(screening(s, 3), InsufficientSamplesError);
}

TEST_CASE("sampling is invariant to thread count and step splitting") {
    testing::SyntheticProblem p(2, 3);
    MultilevelSampler a(p, work_costs(1)), b(p, work_costs(3));
    for (std::size_t k = 0; k < 3; ++k) {
        a.extend(k, 97);
        b.extend(k, 10);
        b.extend(k, 55);
        b.extend(k, 97);
    }
    for (std::size_t k = 0; k < 3; ++k) CHECK(a.accumulator(k) == b.accumulator(k));
}

TEST_CASE("single level sampler reproduces the plain MC mean") {
    testing::SyntheticProblem p(2, 4);
    auto s = MultilevelSampler::single_level(p, 2, work_costs());
    s.extend(0, 64);
    const auto est = combine(level_stats(s.accumulators()));
    for (std::size_t i = 0; i < p.qoi_size(); ++i) {
        double sum = 0.0;
        for (std::uint64_t j = 0; j < 64; ++j) sum += p.evaluate(2, sample_id(2, kStreamMlmc, j))[i];
        CHECK(est.mean[i] == doctest::Approx(sum / 64.0).epsilon(1e-15));
    }
}

TEST_CASE("adaptive MLMC meets its targets on a closed-form problem") {
    testing::SyntheticProblem p(3, 5);
    const std::vector<Targets> targets{{1e-3, 1e-3}, {2e-4, 2e-4}};
    const auto r = run_mlmc(p, targets, small_screen(), work_costs());
    REQUIRE(r.converged);
    REQUIRE(r.results.size() == 2);
    for (const auto& res : r.results) {
        CHECK(res.e_s <= res.target.mean);
        CHECK(res.e_vs <= res.target.variance);
        for (std::size_t l = 1; l < res.N.size(); ++l) CHECK(res.N[l] <= res.N[l - 1]);
    }
    // Truth: mean m + sum a 4^-k w, variance s^2 + sum (a 4^-k w)^2.
    const auto& e = r.results.back().estimates;
    for (std::size_t i = 0; i < 5; ++i) {
        const double di = static_cast<double>(i);
        const double m = 1.0 + 0.25 * di, sd = 0.1 * (1.0 + 0.1 * di), w = 1.0 + 0.05 * di;
        double mean = m, var = sd * sd;
        for (int k = 1; k <= 3; ++k) {
            mean += 0.5 * std::pow(4.0, -k) * w;
            var += std::pow(0.5 * std::pow(4.0, -k) * w, 2);
        }
        CHECK(std::abs(e.mean[i] - mean) <= 4.0 * std::sqrt(r.results.back().abs_mean));
        CHECK(std::abs(e.variance[i] - var) <= 4.0 * std::sqrt(r.results.back().abs_variance));
    }
}

TEST_CASE("errors and allocations are invariant to QoI scaling") {
    testing::SyntheticProblem p(3, 6);
    const std::vector<Targets> targets{{5e-4, 5e-4}};
    RunReport ref;
    for (double scale : {1.0, 1e-3, 1e3}) {
        testing::SyntheticProblem scaled(3, 6, 0.5, scale);
        const auto r = run_mlmc(scaled, targets, small_screen(), work_costs());
        REQUIRE(r.converged);
        if (scale == 1.0) {
            ref = r;
            continue;
        }
        const auto& a = r.results[0];
        const auto& b = ref.results[0];
        CHECK(testing::rel_err(a.e_s, b.e_s) <= 1e-12);
        CHECK(testing::rel_err(a.e_vs, b.e_vs) <= 1e-12);
        CHECK(a.N == b.N);
        CHECK(a.N_mean == b.N_mean);
        CHECK(a.N_variance == b.N_variance);
    }
}

TEST_CASE("variance estimation needs at least as many samples as the mean") {
    testing::SyntheticProblem p(3, 7);
    const std::vector<Targets> targets{{3e-4, 3e-4}};
    const auto m = run_mlmc(p, targets, small_screen(Mode::mean), work_costs());
    const auto v = run_mlmc(p, targets, small_screen(Mode::variance), work_costs());
    REQUIRE(m.converged);
    REQUIRE(v.converged);
    std::uint64_t nm = 0, nv = 0;
    for (auto n : m.results[0].N) nm += n;
    for (auto n : v.results[0].N) nv += n;
    CHECK(nv >= nm);
}

TEST_CASE("MC and MLMC means agree within their standard errors") {
    testing::SyntheticProblem p(3, 8, 0.05);
    const std::vector<Targets> targets{{4e-4, 4e-4}};
    MultilevelSampler ml(p, work_costs());
    auto mc = MultilevelSampler::single_level(p, 3, [] {
        auto o = work_costs();
        o.stream = kStreamMc;
        return o;
    }());
    REQUIRE(run_adaptive(ml, targets, small_screen()).converged);
    REQUIRE(run_adaptive(mc, targets, small_screen()).converged);
    const auto sml = level_stats(ml.accumulators());
    const auto smc = level_stats(mc.accumulators());
    const auto eml = combine(sml), emc = combine(smc);
    for (std::size_t i = 0; i < p.qoi_size(); ++i) {
        double se2 = smc[0][i].V / static_cast<double>(mc.counts()[0]);
        for (std::size_t l = 0; l < sml.size(); ++l) se2 += sml[l][i].V / static_cast<double>(ml.counts()[l]);
        CHECK(std::abs(eml.mean[i] - emc.mean[i]) <= 3.0 * std::sqrt(se2));
    }
    CHECK(mc.total_cost() > ml.total_cost());
}

TEST_CASE("deterministic material") {
    const auto h = fem::build_plate_hierarchy(7.0, 21.7, 2, 6, 2);
    ElasticityModel model;
    model.delta_C = 0.0;
    model.kle_modes = 4;
    ElasticityProblem p(h, model, 1);
    CHECK(p.deterministic());
    MultilevelSampler s(p, work_costs());
    const auto summary = screening(s, 8);
    for (const auto& lv : summary) {
        CHECK(lv.V <= 1e-20 * lv.mean_u * lv.mean_u);
        CHECK(lv.Z <= 1e-20 * lv.mean_u * lv.mean_u);
    }
    CHECK(summary[2].mean_Y < summary[1].mean_Y);

    // Zero spread cannot normalize; the magnitude form stops at the screening size.
    const std::vector<Targets> targets{{1e-4, 1e-4}};
    RunOptions opt = small_screen(Mode::mean);
    opt.n_screen = 4;
    CHECK_THROWS_AS(run_mlmc(p, targets, opt, work_costs()), NormalizationError);
    opt.normalization = Normalization::magnitude;
    const auto ml = run_mlmc(p, targets, opt, work_costs());
    const auto mc = run_mc(p, targets, opt, work_costs());
    REQUIRE(ml.converged);
    REQUIRE(mc.converged);
    CHECK(ml.results[0].N == std::vector<std::uint64_t>{4, 4, 4});
    CHECK(mc.results[0].N == std::vector<std::uint64_t>{4});
    const double ratio = ml.results[0].cost_total / mc.results[0].cost_total;
    CHECK(ratio < 2.0);
    CHECK(ratio > 0.5);
}

TEST_CASE("sample ids") {
    CHECK(sample_id(0, 0, 0) == 0);
    CHECK(sample_id(3, 1, 5) == ((3ull << 56) | (1ull << 40) | 5ull));
    CHECK_THROWS_AS(sample_id(-1, 0, 0), Error);
    CHECK_THROWS_AS(sample_id(0, 0, kMaxSampleIndex + 1), Error);
}

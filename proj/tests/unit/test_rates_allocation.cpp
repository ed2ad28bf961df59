#include <doctest.h>

#include <cmath>
#include <random>

#include "simlmc/allocation.hpp"
#include "simlmc/error.hpp"
#include "simlmc/rates.hpp"
#include "support.hpp"

using namespace simlmc;
using namespace simlmc::mlmc;

namespace {

RatesFit table_rates() {
    RatesFit r;
    r.alpha = 2.0594;
    r.beta = 1.4238;
    r.gamma = 1.5989;
    r.alpha_v = 1.6911;
    r.beta_v = 1.4741;
    r.c8 = 0.0058;
    r.c2 = 2.3e-7;
    r.c3 = 0.41;
    r.c9 = 3.1e-9;
    r.c6 = 1.1374e-11;
    return r;
}

}  // namespace

TEST_CASE("power-law fit") {
    const std::vector<double> h{1.0, 0.5, 0.25, 0.125};
    std::vector<double> y;
    for (double x : h) y.push_back(0.0058 * std::pow(x, 2.0594));
    const auto f = fit_power_law(h, y);
    CHECK(std::abs(f.rate - 2.0594) <= 1e-10);
    CHECK(std::abs(f.constant - 0.0058) <= 1e-10 * 0.0058);
    CHECK(f.points == 4);

    const std::vector<double> h2{2.0, 0.5}, y2{3.0, 0.7};
    const auto g = fit_power_law(h2, y2);
    CHECK(g.rate == doctest::Approx(std::log(3.0 / 0.7) / std::log(4.0)).epsilon(1e-14));
    CHECK(g.constant * std::pow(2.0, g.rate) == doctest::Approx(3.0).epsilon(1e-14));

    const std::vector<double> y3{1.0, 0.0, -2.0, 0.1};
    CHECK(fit_power_law(h, y3).points == 2);
    const std::vector<double> y4{1.0, 0.0, -2.0, 0.0};
    CHECK_THROWS_AS(fit_power_law(h, y4), FitError);
}

TEST_CASE("rate fits recover the generating constants") {
    const auto truth = table_rates();
    const std::vector<double> h{3.6, 1.8, 0.9, 0.45};
    const auto fit = fit_rates(synthetic_levels(truth, h));
    CHECK(std::abs(fit.alpha - truth.alpha) <= 1e-10);
    CHECK(std::abs(fit.beta - truth.beta) <= 1e-10);
    CHECK(std::abs(fit.gamma - truth.gamma) <= 1e-10);
    CHECK(std::abs(fit.alpha_v - truth.alpha_v) <= 1e-10);
    CHECK(std::abs(fit.beta_v - truth.beta_v) <= 1e-10);
    CHECK(testing::rel_err(fit.c8, truth.c8) <= 1e-10);
    CHECK(testing::rel_err(fit.c6, truth.c6) <= 1e-10);
    CHECK(testing::rel_err(fit.c3, truth.c3) <= 1e-10);
    CHECK(fit.mean_regime == Regime::third);
    CHECK(fit.variance_regime == Regime::third);
    CHECK(fit.mean_condition);
    CHECK(fit.variance_condition);
    CHECK_THROWS_AS(fit_rates(synthetic_levels(truth, std::vector<double>{3.6, 1.8})), FitError);
}

TEST_CASE("regime classification") {
    CHECK(classify(2.0, 1.0) == Regime::first);
    CHECK(classify(1.0, 1.0) == Regime::second);
    CHECK(classify(1.0, 2.0) == Regime::third);
    CHECK(to_string(Regime::third) == "third");
}

TEST_CASE("allocation closed form examples") {
    const std::vector<double> W{4, 1}, C{1, 4};
    const auto p = allocate(W, C, 0.1, 2);
    CHECK(p.N == std::vector<std::uint64_t>{80, 20});
    CHECK(p.predicted_cost == 160.0);
    const std::vector<double> w1{1}, c1{1};
    CHECK(allocate(w1, c1, 0.01, 2).N == std::vector<std::uint64_t>{100});
    const std::vector<double> C10{10, 40};
    CHECK(allocate(W, C10, 0.1, 2).N == p.N);
    const std::vector<double> zero{0, 0};
    CHECK(allocate(zero, C, 0.1, 4, Estimand::variance).N == std::vector<std::uint64_t>{4, 4});
    CHECK_THROWS_AS(allocate(W, C, 0.0, 2), Error);
    CHECK_THROWS_AS(allocate(W, std::vector<double>{1, -1}, 0.1, 2), Error);
}

TEST_CASE("per-node allocation takes the largest count") {
    const std::vector<std::vector<double>> W{{4, 1}, {1, 2}};
    const std::vector<double> C{1, 4};
    const auto p = allocate_nodes(W, C, 0.1, 2);
    const auto a = allocate(std::vector<double>{4, 1}, C, 0.1, 2);
    const auto b = allocate(std::vector<double>{1, 2}, C, 0.1, 2);
    CHECK(p.N[0] == std::max(a.N[0], b.N[0]));
    CHECK(p.N[1] == std::max(a.N[1], b.N[1]));
}

TEST_CASE("allocation is within one increment of the integer optimum") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 30; ++t) {
        const std::size_t L = 1 + static_cast<std::size_t>(t % 3);
        std::vector<double> W(L), C(L);
        for (std::size_t l = 0; l < L; ++l) {
            W[l] = std::pow(10.0, -3.0 * u(rng));
            C[l] = std::pow(10.0, 2.0 * u(rng));
        }
        double sum = 0, top = 0;
        for (std::size_t l = 0; l < L; ++l) {
            sum += std::sqrt(W[l] * C[l]);
            top = std::max(top, std::sqrt(W[l] / C[l]));
        }
        const double target = top * sum / (20.0 + 180.0 * u(rng));
        const auto plan = allocate(W, C, target, 2);
        double err = 0, inc = 0;
        for (std::size_t l = 0; l < L; ++l) {
            err += W[l] / static_cast<double>(plan.N[l]);
            inc += C[l];
        }
        CHECK(err <= target * (1 + 1e-12));
        const double best = testing::grid_min_cost(W, C, target, 2, 200);
        CHECK(plan.predicted_cost >= best * (1 - 1e-12));
        CHECK(plan.predicted_cost <= best + inc);
    }
}

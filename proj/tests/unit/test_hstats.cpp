#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "simlmc/error.hpp"
#include "simlmc/exact_sum.hpp"
#include "simlmc/hstats.hpp"

using namespace simlmc;
using namespace simlmc::stats;

namespace {

struct Pair {
    double x, y, p;
};

// Calls f(xs, ys, prob) for every ordered n-tuple drawn with replacement.
void enumerate(const std::vector<Pair>& pop, std::size_t n,
               const std::function<void(const std::vector<double>&, const std::vector<double>&, double)>& f) {
    std::vector<std::size_t> idx(n, 0);
    std::vector<double> xs(n), ys(n);
    while (true) {
        double p = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = pop[idx[i]].x;
            ys[i] = pop[idx[i]].y;
            p *= pop[idx[i]].p;
        }
        f(xs, ys, p);
        std::size_t k = 0;
        while (k < n && ++idx[k] == pop.size()) idx[k++] = 0;
        if (k == n) return;
    }
}

struct PopMoments {
    double mx = 0, my = 0, vx = 0, vy = 0, cxy = 0, mu4 = 0, mu22 = 0;
};

PopMoments moments(const std::vector<Pair>& pop) {
    PopMoments m;
    for (const auto& q : pop) {
        m.mx += q.p * q.x;
        m.my += q.p * q.y;
    }
    for (const auto& q : pop) {
        const double dx = q.x - m.mx, dy = q.y - m.my;
        m.vx += q.p * dx * dx;
        m.vy += q.p * dy * dy;
        m.cxy += q.p * dx * dy;
        m.mu4 += q.p * dx * dx * dx * dx;
        m.mu22 += q.p * dx * dx * dy * dy;
    }
    return m;
}

const std::vector<Pair> kCoupled = {{0, 0, 0.4}, {0, 1, 0.1}, {1, 0, 0.2}, {1, 1, 0.3}};

}  // namespace

TEST_CASE("h2 basics") {
    const std::vector<double> c{2.5, 2.5, 2.5};
    CHECK(h2(power_sums(c)) == 0.0);
    const std::vector<double> s{1, 2, 3};
    CHECK(h2(power_sums(s)) == doctest::Approx(1.0).epsilon(1e-15));
    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(h2(power_sums(one)), InsufficientSamplesError);
}

TEST_CASE("h2 is unbiased by enumeration") {
    const std::vector<Pair> pop{{0, 0, 1.0 / 3}, {1, 0, 1.0 / 3}, {2, 0, 1.0 / 3}};
    double mean = 0.0;
    std::size_t count = 0;
    enumerate(pop, 3, [&](const auto& x, const auto&, double p) {
        mean += p * h2(power_sums(x));
        ++count;
    });
    CHECK(count == 27);
    CHECK(std::abs(mean - 2.0 / 3.0) <= 1e-12);
}

TEST_CASE("Var(h2) closed form matches enumeration") {
    for (std::size_t n : {4u, 5u}) {
        for (double p1 : {0.5, 0.3}) {
            const std::vector<Pair> pop{{0, 0, 1 - p1}, {1, 0, p1}};
            const auto m = moments(pop);
            double e1 = 0, e2 = 0;
            enumerate(pop, n, [&](const auto& x, const auto&, double p) {
                const double v = h2(power_sums(x));
                e1 += p * v;
                e2 += p * v * v;
            });
            CHECK(std::abs((e2 - e1 * e1) - h2_variance(m.mu4, m.vx * m.vx, n)) <= 1e-12);
        }
    }
}

TEST_CASE("Var(h2) reduces to the normal-sample identity") {
    const std::uint64_t n = 100;
    CHECK(std::abs(h2_variance(3.0, 1.0, n) - 2.0 / 99.0) <= 1e-15);
}

TEST_CASE("Cov(h2, h2) and Var(k11) closed forms match enumeration") {
    const auto m = moments(kCoupled);
    for (std::size_t n : {4u, 5u}) {
        double ex = 0, ey = 0, exy = 0, ek = 0, ek2 = 0;
        enumerate(kCoupled, n, [&](const auto& x, const auto& y, double p) {
            const auto s = power_sums(x, y);
            const double a = h2(s.x()), b = h2(s.y()), k = k11(s);
            ex += p * a;
            ey += p * b;
            exy += p * a * b;
            ek += p * k;
            ek2 += p * k * k;
        });
        CHECK(std::abs((exy - ex * ey) - h2_covariance(m.mu22, m.vx * m.vy, m.cxy * m.cxy, n)) <= 1e-12);
        CHECK(std::abs(ek - m.cxy) <= 1e-12);
        CHECK(std::abs((ek2 - ek * ek) - k11_variance(m.mu22, m.vx * m.vy, m.cxy * m.cxy, n)) <= 1e-12);
    }
}

TEST_CASE("fourth-order estimates are unbiased by enumeration") {
    const std::vector<Pair> pop{{0, 0, 0.2}, {1, 0, 0.5}, {3, 0, 0.3}};
    const auto m = moments(pop);
    for (std::size_t n : {4u, 5u}) {
        double mu4 = 0, s4 = 0, var = 0;
        enumerate(pop, n, [&](const auto& x, const auto&, double p) {
            const auto e = unbiased_fourth_order(power_sums(x));
            mu4 += p * e.mu4;
            s4 += p * e.sigma4;
            var += p * h2_variance(e.mu4, e.sigma4, n);
        });
        CHECK(std::abs(mu4 - m.mu4) <= 1e-12);
        CHECK(std::abs(s4 - m.vx * m.vx) <= 1e-12);
        CHECK(std::abs(var - h2_variance(m.mu4, m.vx * m.vx, n)) <= 1e-12);
    }
    const std::vector<double> three{1, 2, 3};
    CHECK_THROWS_AS(unbiased_fourth_order(power_sums(three)), InsufficientSamplesError);
    CHECK_THROWS_AS(var_of_h2(power_sums(three)), InsufficientSamplesError);
}

TEST_CASE("cross fourth-order estimates are unbiased by enumeration") {
    const auto m = moments(kCoupled);
    for (std::size_t n : {4u, 5u}) {
        double mu22 = 0, vp = 0, cs = 0;
        enumerate(kCoupled, n, [&](const auto& x, const auto& y, double p) {
            const auto e = unbiased_cross_fourth_order(power_sums(x, y));
            mu22 += p * e.mu22;
            vp += p * e.var_product;
            cs += p * e.cov_squared;
        });
        CHECK(std::abs(mu22 - m.mu22) <= 1e-12);
        CHECK(std::abs(vp - m.vx * m.vy) <= 1e-12);
        CHECK(std::abs(cs - m.cxy * m.cxy) <= 1e-12);
    }
}

TEST_CASE("perfect coupling gives zero variance of the difference") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    std::vector<double> x(40);
    for (double& v : x) v = 3.0 + z(rng);
    const auto s = power_sums(x, x);
    CHECK(var_of_h2_difference(s) <= 1e-10 * var_of_h2(s.x()));
    const std::vector<double> zero(40, 0.0);
    std::vector<double> sum(40);
    for (std::size_t i = 0; i < 40; ++i) sum[i] = 2.0 * x[i];
    CHECK(var_of_k11(power_sums(zero, sum)) == 0.0);
}

TEST_CASE("k11 route agrees with the direct difference route") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> z;
    std::vector<double> x(60), y(60), d(60), s(60);
    for (std::size_t i = 0; i < 60; ++i) {
        x[i] = z(rng);
        y[i] = 0.8 * x[i] + 0.6 * z(rng) + 0.1 * x[i] * x[i];
        d[i] = x[i] - y[i];
        s[i] = x[i] + y[i];
    }
    const auto xy = power_sums(x, y);
    const auto ds = power_sums(d, s);
    CHECK(k11(ds) == doctest::Approx(h2(xy.x()) - h2(xy.y())).epsilon(1e-12));
    CHECK(var_of_k11(ds) == doctest::Approx(var_of_h2_difference(xy)).epsilon(1e-10));
}

TEST_CASE("independent samples give a covariance estimate centred on zero") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> z;
    const int trials = 400;
    const std::size_t n = 30;
    std::vector<double> est;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = z(rng);
            y[i] = z(rng);
        }
        est.push_back(cov_of_h2_pair(power_sums(x, y)));
    }
    double m = 0, v = 0;
    for (double e : est) m += e;
    m /= trials;
    for (double e : est) v += (e - m) * (e - m);
    v /= trials - 1;
    CHECK(std::abs(m) <= 3.0 * std::sqrt(v / trials));
}

TEST_CASE("estimates do not depend on sample order") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> z;
    std::vector<double> x(25);
    for (double& v : x) v = 1e3 + z(rng);
    const auto a = power_sums(x);
    std::shuffle(x.begin(), x.end(), rng);
    const auto b = power_sums(x);
    CHECK(a.s1 == b.s1);
    CHECK(a.s4 == b.s4);
    CHECK(var_of_h2(a) == var_of_h2(b));
}

TEST_CASE("exact summation") {
    ExactSum s;
    for (double v : {1e100, 1.0, -1e100, 1e-300, -1.0}) s.add(v);
    CHECK(s.value() == 1e-300);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> v(1000);
    for (double& x : v) x = u(rng) * std::pow(10.0, 20 * u(rng));
    ExactSum a, b, c1, c2;
    for (double x : v) a.add(x);
    std::shuffle(v.begin(), v.end(), rng);
    for (std::size_t i = 0; i < v.size(); ++i) (i < 400 ? c1 : c2).add(v[i]);
    for (double x : v) b.add(x);
    c1 += c2;
    CHECK(a == b);
    CHECK(a == c1);
    CHECK(a.value() == b.value());

    ExactSum big;
    for (int i = 0; i < 100000; ++i) big.add(0.1);
    CHECK(big.value() == doctest::Approx(10000.0).epsilon(1e-15));
    ExactSum inf;
    inf.add(INFINITY);
    CHECK(!std::isfinite(inf.value()));
}

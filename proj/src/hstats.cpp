#include "simlmc/hstats.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <cstdio>
#include <string>

#include "simlmc/error.hpp"
#include "simlmc/exact_sum.hpp"
#include "simlmc/log.hpp"

namespace simlmc::stats {

namespace {

std::atomic<std::uint64_t> g_clamped{0};

double clamp_non_negative(double v, const char* what) {
    if (v >= 0.0) return v;
    const auto count = ++g_clamped;
    if (count <= 5) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", v);
        log::warn(std::string(what) + " estimate " + buf + " clamped to 0" +
                  (count == 5 ? " (further warnings suppressed)" : ""));
    }
    return 0.0;
}

void require(std::uint64_t n, std::uint64_t min, const char* what) {
    if (n < min) {
        throw InsufficientSamplesError(std::string(what) + " needs at least " + std::to_string(min) +
                                       " samples, got " + std::to_string(n));
    }
}

}  // namespace

std::uint64_t clamped_negative_count() { return g_clamped.load(); }

UnivariateSums power_sums(std::span<const double> x) {
    ExactSum s1, s2, s3, s4;
    for (double v : x) {
        const double v2 = v * v;
        s1.add(v);
        s2.add(v2);
        s3.add(v2 * v);
        s4.add(v2 * v2);
    }
    return {x.size(), s1.value(), s2.value(), s3.value(), s4.value()};
}

BivariateSums power_sums(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error("paired samples differ in length");
    std::array<ExactSum, 12> acc;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = x[i], b = y[i], a2 = a * a, b2 = b * b;
        acc[0].add(a);
        acc[1].add(a2);
        acc[2].add(a2 * a);
        acc[3].add(a2 * a2);
        acc[4].add(b);
        acc[5].add(b2);
        acc[6].add(b2 * b);
        acc[7].add(b2 * b2);
        acc[8].add(a * b);
        acc[9].add(a2 * b);
        acc[10].add(a * b2);
        acc[11].add(a2 * b2);
    }
    BivariateSums s;
    s.n = x.size();
    double* fields[] = {&s.x1, &s.x2, &s.x3, &s.x4, &s.y1, &s.y2, &s.y3, &s.y4, &s.xy, &s.x2y, &s.xy2, &s.x2y2};
    for (std::size_t k = 0; k < 12; ++k) *fields[k] = acc[k].value();
    return s;
}

double h2(double s1, double s2, std::uint64_t n) {
    require(n, 2, "h2");
    const double nd = static_cast<double>(n);
    return (s2 - s1 * s1 / nd) / (nd - 1.0);
}

double h2(const UnivariateSums& s) { return h2(s.s1, s.s2, s.n); }

CentralMoments central_moments(const UnivariateSums& s) {
    require(s.n, 1, "central moments");
    const double nd = static_cast<double>(s.n);
    const double a = s.s1 / nd;
    const double p2 = s.s2 / nd, p3 = s.s3 / nd, p4 = s.s4 / nd;
    CentralMoments m;
    m.m2 = p2 - a * a;
    m.m3 = p3 - 3.0 * a * p2 + 2.0 * a * a * a;
    m.m4 = p4 - 4.0 * a * p3 + 6.0 * a * a * p2 - 3.0 * a * a * a * a;
    return m;
}

CrossMoments cross_moments(const BivariateSums& s) {
    require(s.n, 1, "cross moments");
    const double nd = static_cast<double>(s.n);
    const double a = s.x1 / nd, b = s.y1 / nd;
    CrossMoments m;
    m.m20 = s.x2 / nd - a * a;
    m.m02 = s.y2 / nd - b * b;
    m.m11 = s.xy / nd - a * b;
    m.m22 = s.x2y2 / nd - 2.0 * b * s.x2y / nd - 2.0 * a * s.xy2 / nd + b * b * s.x2 / nd + a * a * s.y2 / nd +
            4.0 * a * b * s.xy / nd - 3.0 * a * a * b * b;
    return m;
}

double h2_variance(double mu4, double sigma4, std::uint64_t n) {
    require(n, 2, "Var(h2)");
    const double nd = static_cast<double>(n);
    return mu4 / nd - sigma4 * (nd - 3.0) / (nd * (nd - 1.0));
}

double h2_covariance(double mu22, double var_product, double cov_squared, std::uint64_t n) {
    require(n, 2, "Cov(h2, h2)");
    const double nd = static_cast<double>(n);
    return (mu22 - var_product) / nd + 2.0 * cov_squared / (nd * (nd - 1.0));
}

// E[m4]  = k ((n^2 - 3n + 3) mu4 + 3 (2n - 3) sigma4)
// E[m2^2] = k ((n - 1) mu4 + (n^2 - 2n + 3) sigma4),  k = (n - 1) / n^3
FourthOrderEstimates unbiased_fourth_order(const UnivariateSums& s) {
    require(s.n, 4, "fourth-order moment estimation");
    const auto m = central_moments(s);
    const double n = static_cast<double>(s.n);
    const double k = (n - 1.0) / (n * n * n);
    const double a = n * n - 3.0 * n + 3.0, b = 3.0 * (2.0 * n - 3.0);
    const double c = n - 1.0, d = n * n - 2.0 * n + 3.0;
    const double det = k * n * n * (n - 2.0) * (n - 3.0);
    const double m22 = m.m2 * m.m2;
    return {(d * m.m4 - b * m22) / det, (a * m22 - c * m.m4) / det};
}

// [E m22, E m20 m02, E m11^2] = k A [mu22, s20 s02, s11^2] with
// A = [[n^2-3n+3, 2n-3, 2(2n-3)], [n-1, (n-1)^2, 2], [n-1, 1, n^2-2n+2]].
CrossFourthOrderEstimates unbiased_cross_fourth_order(const BivariateSums& s) {
    require(s.n, 4, "fourth-order cross-moment estimation");
    const auto m = cross_moments(s);
    const double n = static_cast<double>(s.n);
    const double k = (n - 1.0) / (n * n * n);
    Eigen::Matrix3d a;
    a << n * n - 3.0 * n + 3.0, 2.0 * n - 3.0, 2.0 * (2.0 * n - 3.0),
         n - 1.0, (n - 1.0) * (n - 1.0), 2.0,
         n - 1.0, 1.0, n * n - 2.0 * n + 2.0;
    const Eigen::Vector3d rhs(m.m22, m.m20 * m.m02, m.m11 * m.m11);
    const Eigen::Vector3d mu = a.partialPivLu().solve(rhs / k);
    return {mu(0), mu(1), mu(2)};
}

double var_of_h2(const UnivariateSums& s) {
    const auto e = unbiased_fourth_order(s);
    return clamp_non_negative(h2_variance(e.mu4, e.sigma4, s.n), "Var(h2)");
}

double cov_of_h2_pair(const BivariateSums& s) {
    const auto e = unbiased_cross_fourth_order(s);
    return h2_covariance(e.mu22, e.var_product, e.cov_squared, s.n);
}

double var_of_h2_difference(const BivariateSums& s) {
    const auto ex = unbiased_fourth_order(s.x());
    const auto ey = unbiased_fourth_order(s.y());
    const double vx = h2_variance(ex.mu4, ex.sigma4, s.n);
    const double vy = h2_variance(ey.mu4, ey.sigma4, s.n);
    return clamp_non_negative(vx + vy - 2.0 * cov_of_h2_pair(s), "Var(h2 difference)");
}

double k11(const BivariateSums& s) {
    require(s.n, 2, "k11");
    const double nd = static_cast<double>(s.n);
    return (s.xy - s.x1 * s.y1 / nd) / (nd - 1.0);
}

double k11_variance(double mu22, double var_product, double cov_squared, std::uint64_t n) {
    require(n, 2, "Var(k11)");
    const double nd = static_cast<double>(n);
    return mu22 / nd + (var_product - (nd - 2.0) * cov_squared) / (nd * (nd - 1.0));
}

double var_of_k11(const BivariateSums& s) {
    const auto e = unbiased_cross_fourth_order(s);
    return clamp_non_negative(k11_variance(e.mu22, e.var_product, e.cov_squared, s.n), "Var(k11)");
}

}  // namespace simlmc::stats

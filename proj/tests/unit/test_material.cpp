#include <doctest.h>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <random>

#include "simlmc/error.hpp"
#include "simlmc/material.hpp"

using namespace simlmc;
using namespace simlmc::material;

namespace {

const Matrix3 kOrtho = plane_stress_orthotropic({});

double frob2(const Matrix3& m) { return (m.array() * m.array()).sum(); }

std::array<double, 6> germ(std::mt19937_64& rng) {
    std::normal_distribution<double> z;
    return {z(rng), z(rng), z(rng), z(rng), z(rng), z(rng)};
}

}  // namespace

TEST_CASE("orthotropic plane-stress matrix") {
    const OrthotropicParams p{};
    const Matrix3 s = kOrtho.inverse();
    CHECK(s(0, 0) == doctest::Approx(1.0 / p.E1).epsilon(1e-12));
    CHECK(s(1, 1) == doctest::Approx(1.0 / p.E2).epsilon(1e-12));
    CHECK(s(0, 1) == doctest::Approx(-p.nu21 / p.E2).epsilon(1e-12));
    CHECK(s(2, 2) == doctest::Approx(1.0 / p.G12).epsilon(1e-12));
    CHECK_THROWS_AS(plane_stress_orthotropic({1.0, 1.0, 1.5, 1.0}), MaterialError);
    CHECK_THROWS_AS(plane_stress_orthotropic({-1.0, 1.0, 0.1, 1.0}), MaterialError);
}

TEST_CASE("mean elasticity factor") {
    MeanElasticity m(kOrtho);
    const Matrix3 q = m.factor();
    CHECK((q.transpose() * q - kOrtho).cwiseAbs().maxCoeff() <= 1e-12 * kOrtho.cwiseAbs().maxCoeff());
    CHECK(q(1, 0) == 0.0);
    CHECK(q(2, 0) == 0.0);
    CHECK(q(2, 1) == 0.0);
    for (int i = 0; i < 3; ++i) CHECK(q(i, i) > 0.0);
    Matrix3 bad = kOrtho;
    bad(0, 1) += 1.0;
    CHECK_THROWS_AS(MeanElasticity{bad}, MaterialError);
    CHECK_THROWS_AS(MeanElasticity{Matrix3(-Matrix3::Identity())}, MaterialError);
}

TEST_CASE("dispersion calibration") {
    CHECK(std::abs(delta_T_from_delta_C(0.1, Matrix3::Identity()) - 0.1) <= 1e-14);
    const double dt = delta_T_from_delta_C(0.1, kOrtho);
    CHECK(std::abs(dispersion_of_C(dt, kOrtho) - 0.1) <= 1e-14);
    const Matrix3 d = Eigen::Vector3d(2, 1, 1).asDiagonal();
    CHECK(std::abs(delta_T_from_delta_C(0.3, d) - delta_T_from_delta_C(0.3, 1e5 * d)) <= 1e-14);
    CHECK_THROWS_AS(delta_T_from_delta_C(0.0, kOrtho), CalibrationError);
    CHECK_THROWS_AS(delta_T_from_delta_C(1.0, kOrtho), CalibrationError);
    CHECK_THROWS_AS(delta_T_from_delta_C(0.9, Matrix3(Eigen::Vector3d(1, 1e-6, 1e-6).asDiagonal())), CalibrationError);
}

TEST_CASE("gamma quantile agrees with boost's inverse") {
    boost::math::normal_distribution<double> normal;
    for (double a : {0.7, 3.0, 12.5, 199.5}) {
        for (double g : {-6.0, -2.5, -0.3, 0.0, 0.4, 1.7, 5.0}) {
            const double x = gamma_quantile_of_normal(a, g);
            const double ref = g <= 0 ? boost::math::gamma_p_inv(a, boost::math::cdf(normal, g))
                                      : boost::math::gamma_q_inv(a, boost::math::cdf(boost::math::complement(normal, g)));
            CHECK(x == doctest::Approx(ref).epsilon(1e-11));
        }
    }
    CHECK_THROWS_AS(gamma_quantile_of_normal(1.0, std::nan("")), ModelDomainError);
    CHECK_THROWS_AS(gamma_quantile_of_normal(-1.0, 0.0), ModelDomainError);
}

TEST_CASE("tabulated gamma quantile matches the root-find") {
    for (double a : {8.0, 199.5, 200.5}) {
        GammaQuantileTable table(a);
        double worst = 0.0;
        for (int i = -4000; i <= 4000; ++i) {
            const double g = 7.99 * i / 4000.0 + 1e-4 * std::sin(i);
            worst = std::max(worst, std::abs(table(g) / gamma_quantile_of_normal(a, g) - 1.0));
        }
        CHECK(worst < 1e-12);
        CHECK(table(9.0) == gamma_quantile_of_normal(a, 9.0));
    }
}

TEST_CASE("fluctuation sampler parameters") {
    FluctuationSampler s(0.2);
    CHECK(s.sigma() == doctest::Approx(0.1));
    CHECK(s.shape(1) == doctest::Approx(4.0 / 0.08));
    CHECK(s.shape(3) == doctest::Approx(4.0 / 0.08 - 1.0));
    CHECK_THROWS_AS(FluctuationSampler{0.0}, ModelDomainError);
    CHECK_THROWS_AS(FluctuationSampler{1.0}, ModelDomainError);
    const std::array<double, 6> inf{0, 0, 0, INFINITY, 0, 0};
    CHECK_THROWS_AS(s.sample(inf), ModelDomainError);
    CHECK_THROWS_AS(s.sample(std::array<double, 5>{}), ModelDomainError);
}

TEST_CASE("fluctuation statistics over 1e5 germs") {
    const double dt = 0.2;
    FluctuationSampler s(dt);
    std::mt19937_64 rng(2024);
    const std::size_t n = 100000;
    Eigen::Array33d s1 = Eigen::Array33d::Zero(), s2 = Eigen::Array33d::Zero();
    double dev = 0.0;
    std::size_t spd = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Matrix3 t = s.sample(germ(rng));
        s1 += t.array();
        s2 += t.array() * t.array();
        dev += frob2(t - Matrix3::Identity());
        spd += Eigen::SelfAdjointEigenSolver<Matrix3>(t).eigenvalues()(0) > 0.0;
    }
    const double dn = static_cast<double>(n);
    const Eigen::Array33d mean = s1 / dn;
    const Eigen::Array33d se = ((s2 / dn - mean * mean) / dn).sqrt();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(std::abs(mean(i, j) - (i == j ? 1.0 : 0.0)) <= 3.0 * se(i, j));
    CHECK(std::sqrt(dev / dn / 3.0) == doctest::Approx(dt).epsilon(0.05));
    CHECK(spd == n);
}

TEST_CASE("zero germ gives the closed-form deterministic matrix") {
    const double dt = delta_T_from_delta_C(0.1, kOrtho);
    FluctuationSampler s(dt);
    MeanElasticity mean(kOrtho);
    const std::array<double, 6> zero{};
    Matrix3 t = Matrix3::Zero();
    for (std::size_t j = 1; j <= 3; ++j) {
        const auto jj = static_cast<Eigen::Index>(j - 1);
        t(jj, jj) = 2.0 * s.sigma() * s.sigma() * boost::math::gamma_p_inv(s.shape(j), 0.5);
    }
    CHECK((s.sample(zero) - t).cwiseAbs().maxCoeff() <= 1e-12);

    const auto basis = field::build_kle(field::CovarianceKernel{}, fem::build_plate_mesh(7.0, 21.7, 2, 6), 10);
    field::GaussianDraw d{0, 0, 10, std::vector<double>(60, 0.0)};
    const std::vector<field::Point> pts{{0, 0}, {3, 4}, {7, 21.7}};
    const auto c = sample_C_field(mean, s, basis, d, pts);
    const Matrix3 expected = mean.factor().transpose() * t * mean.factor();
    for (const auto& m : c) {
        CHECK((m - expected).cwiseAbs().maxCoeff() <= 1e-12 * expected.cwiseAbs().maxCoeff());
        CHECK(m == c.front());
    }
}

TEST_CASE("small dispersion keeps C close to the mean") {
    FluctuationSampler s(1e-4);
    MeanElasticity mean(kOrtho);
    const auto basis = field::build_kle(field::CovarianceKernel{}, fem::build_plate_mesh(7.0, 21.7, 2, 6), 10);
    const std::vector<field::Point> pts{{1, 1}, {6, 20}};
    for (std::uint64_t id = 0; id < 20; ++id) {
        for (const auto& c : sample_C_field(mean, s, basis, field::draw(1, id, 10), pts)) {
            CHECK((c - kOrtho).norm() <= 0.01 * kOrtho.norm());
        }
    }
}

TEST_CASE("random elasticity statistics at one point") {
    const double dt = delta_T_from_delta_C(0.1, kOrtho);
    FluctuationSampler s(dt);
    MeanElasticity mean(kOrtho);
    std::mt19937_64 rng(99);
    const std::size_t n = 10000;
    double dev = 0.0;
    Eigen::Array33d s1 = Eigen::Array33d::Zero(), s2 = Eigen::Array33d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        const Matrix3 c = mean.factor().transpose() * s.sample(germ(rng)) * mean.factor();
        CHECK_MESSAGE((c - c.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * c.cwiseAbs().maxCoeff(), "sample " << i);
        dev += frob2(c - kOrtho);
        s1 += c.array();
        s2 += c.array() * c.array();
    }
    const double dn = static_cast<double>(n);
    CHECK(std::sqrt(dev / dn / frob2(kOrtho)) == doctest::Approx(0.1).epsilon(0.05));
    const Eigen::Array33d m = s1 / dn;
    const Eigen::Array33d se = ((s2 / dn - m * m) / dn).sqrt();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (se(i, j) > 0) CHECK(std::abs(m(i, j) - kOrtho(i, j)) <= 3.0 * se(i, j));
}

TEST_CASE("one-point statistics do not depend on location") {
    const double dt = delta_T_from_delta_C(0.1, kOrtho);
    FluctuationSampler s(dt);
    MeanElasticity mean(kOrtho);
    const auto basis = field::build_kle(field::CovarianceKernel{}, fem::build_plate_mesh(7.0, 21.7, 4, 12), 40);
    const std::vector<field::Point> pts{{1.0, 3.0}, {5.5, 18.0}};
    field::FieldEvaluator ev(basis, pts);
    const std::size_t n = 3000;
    double dev[2] = {0, 0}, c11[2] = {0, 0}, c11sq[2] = {0, 0};
    std::vector<Matrix3> c;
    for (std::size_t i = 0; i < n; ++i) {
        sample_C_field(mean, s, ev, field::draw(8, i, 40), c);
        for (std::size_t p = 0; p < 2; ++p) {
            dev[p] += frob2(c[p] - kOrtho) / frob2(kOrtho);
            c11[p] += c[p](0, 0);
            c11sq[p] += c[p](0, 0) * c[p](0, 0);
        }
    }
    const double dn = static_cast<double>(n);
    double se = 0.0;
    for (std::size_t p = 0; p < 2; ++p) se += (c11sq[p] / dn - std::pow(c11[p] / dn, 2)) / dn;
    CHECK(std::abs(c11[0] - c11[1]) / dn <= 4.0 * std::sqrt(se));
    CHECK(std::sqrt(dev[0] / dn) == doctest::Approx(std::sqrt(dev[1] / dn)).epsilon(0.1));
}

TEST_CASE("same draw gives the same C at common nodes of two levels") {
    const auto h = fem::build_plate_hierarchy(7.0, 21.7, 2, 6, 1);
    const auto basis = field::build_kle(field::CovarianceKernel{}, h.finest(), 30);
    FluctuationSampler s(0.2);
    MeanElasticity mean(kOrtho);
    const auto d = field::draw(3, 12, 30);
    std::vector<field::Point> p0, p1;
    for (std::size_t i = 0; i < 21; ++i) {
        p0.push_back(h.meshes[0].nodes[h.common_nodes[0][i]]);
        p1.push_back(h.meshes[1].nodes[h.common_nodes[1][i]]);
    }
    const auto a = sample_C_field(mean, s, basis, d, p0);
    const auto b = sample_C_field(mean, s, basis, d, p1);
    for (std::size_t i = 0; i < 21; ++i) CHECK(a[i] == b[i]);
}

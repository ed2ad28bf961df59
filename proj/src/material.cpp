#include "simlmc/material.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "simlmc/error.hpp"

namespace simlmc::material {

Matrix3 plane_stress_orthotropic(const OrthotropicParams& p) {
    if (!(p.E1 > 0.0) || !(p.E2 > 0.0) || !(p.G12 > 0.0)) {
        throw MaterialError("orthotropic moduli must be positive");
    }
    const double nu12 = p.nu21 * p.E1 / p.E2;
    const double denom = 1.0 - nu12 * p.nu21;
    if (!(denom > 0.0)) throw MaterialError("orthotropic Poisson ratios give a non-SPD matrix");
    Matrix3 c = Matrix3::Zero();
    c(0, 0) = p.E1 / denom;
    c(1, 1) = p.E2 / denom;
    c(0, 1) = c(1, 0) = p.nu21 * p.E1 / denom;
    c(2, 2) = p.G12;
    return c;
}

Matrix3 plane_stress_isotropic(double young, double poisson) {
    if (!(young > 0.0) || !(poisson > -1.0 && poisson < 0.5)) {
        throw MaterialError("isotropic constants out of range");
    }
    const double f = young / (1.0 - poisson * poisson);
    Matrix3 c;
    c << f, f * poisson, 0.0, f * poisson, f, 0.0, 0.0, 0.0, f * (1.0 - poisson) / 2.0;
    return c;
}

MeanElasticity::MeanElasticity(const Matrix3& c_bar) : c_bar_(c_bar) {
    if (!c_bar.allFinite()) throw MaterialError("mean elasticity matrix is not finite");
    const double scale = c_bar.cwiseAbs().maxCoeff();
    if ((c_bar - c_bar.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw MaterialError("mean elasticity matrix is not symmetric");
    }
    Eigen::LLT<Matrix3> llt(c_bar);
    if (llt.info() != Eigen::Success) throw MaterialError("mean elasticity matrix is not positive definite");
    q_ = llt.matrixU();
}

namespace {

double trace_ratio(const Matrix3& c) {
    const double tr = c.trace();
    return tr * tr / (c * c).trace();
}

}  // namespace

double dispersion_of_C(double delta_T, const Matrix3& c_bar) {
    constexpr double n = 3.0;
    return delta_T / std::sqrt(n + 1.0) * std::sqrt(1.0 + trace_ratio(c_bar));
}

double delta_T_from_delta_C(double delta_C, const Matrix3& c_bar) {
    if (!(delta_C > 0.0 && delta_C < 1.0)) {
        throw CalibrationError("delta_C = " + std::to_string(delta_C) + " outside (0, 1)");
    }
    constexpr double n = 3.0;
    const double delta_T = delta_C * std::sqrt(n + 1.0) / std::sqrt(1.0 + trace_ratio(c_bar));
    if (!(delta_T > 0.0 && delta_T < 1.0)) {
        throw CalibrationError("delta_C = " + std::to_string(delta_C) + " requires delta_T = " +
                               std::to_string(delta_T) + " outside (0, 1)");
    }
    return delta_T;
}

double gamma_quantile_of_normal(double a, double g) {
    if (!std::isfinite(g)) throw ModelDomainError("non-finite Gaussian germ");
    if (!(a > 0.0)) throw ModelDomainError("Gamma shape must be positive");
    // Solve F(x) = 0 with F increasing: P(a,x) - p below the median, q - Q(a,x) above.
    const bool upper = g > 0.0;
    const double tail = 0.5 * std::erfc(std::abs(g) / std::numbers::sqrt2);
    if (!(tail > 0.0)) throw ModelDomainError("Gaussian germ too extreme for the Gamma quantile");
    auto residual = [&](double x) {
        return upper ? tail - boost::math::gamma_q(a, x) : boost::math::gamma_p(a, x) - tail;
    };

    // Wilson-Hilferty start; g is already the standard normal quantile.
    const double c = 1.0 / (9.0 * a);
    double x = a * std::pow(std::max(1.0 - c + g * std::sqrt(c), 1e-3), 3.0);
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();

    for (int it = 0; it < 200; ++it) {
        const double f = residual(x);
        if (f == 0.0) return x;
        if (f < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        const double slope = boost::math::gamma_p_derivative(a, x);
        double next = slope > 0.0 ? x - f / slope : std::numeric_limits<double>::quiet_NaN();
        if (!(next > lo && next < hi)) {
            next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * x + 1.0;
        }
        if (std::abs(next - x) <= 1e-13 * std::abs(next)) return next;
        if (std::isfinite(hi) && hi - lo <= 1e-13 * hi) return 0.5 * (lo + hi);
        x = next;
    }
    throw ModelDomainError("Gamma quantile iteration did not converge");
}

GammaQuantileTable::GammaQuantileTable(double shape) : shape_(shape), coeffs_(kPieces * (kDegree + 1)) {
    constexpr std::size_t m = kDegree + 1;
    const double width = 2.0 * kRange / static_cast<double>(kPieces);
    std::array<double, m> f{};
    for (std::size_t piece = 0; piece < kPieces; ++piece) {
        const double mid = -kRange + (static_cast<double>(piece) + 0.5) * width;
        for (std::size_t k = 0; k < m; ++k) {
            const double t = std::cos(std::numbers::pi * (static_cast<double>(k) + 0.5) / m);
            f[k] = std::cbrt(gamma_quantile_of_normal(shape, mid + 0.5 * width * t) / shape);
        }
        for (std::size_t j = 0; j < m; ++j) {
            double c = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                c += f[k] * std::cos(std::numbers::pi * static_cast<double>(j) * (static_cast<double>(k) + 0.5) / m);
            }
            coeffs_[piece * m + j] = (j == 0 ? 1.0 : 2.0) * c / m;
        }
    }
}

double GammaQuantileTable::operator()(double g) const {
    if (!(std::abs(g) < kRange)) return gamma_quantile_of_normal(shape_, g);
    constexpr std::size_t m = kDegree + 1;
    const double width = 2.0 * kRange / static_cast<double>(kPieces);
    const double pos = (g + kRange) / width;
    const auto piece = std::min(static_cast<std::size_t>(pos), kPieces - 1);
    const double t = 2.0 * (pos - static_cast<double>(piece)) - 1.0;
    const double* c = coeffs_.data() + piece * m;
    // Clenshaw recurrence.
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t j = m - 1; j > 0; --j) {
        const double b0 = 2.0 * t * b1 - b2 + c[j];
        b2 = b1;
        b1 = b0;
    }
    const double y = t * b1 - b2 + c[0];
    return shape_ * y * y * y;
}

FluctuationSampler::FluctuationSampler(double delta_T) : delta_T_(delta_T) {
    if (!(delta_T > 0.0 && delta_T < 1.0)) {
        throw ModelDomainError("delta_T = " + std::to_string(delta_T) + " outside (0, 1)");
    }
    constexpr double nd = static_cast<double>(n);
    sigma_ = delta_T / std::sqrt(nd + 1.0);
    for (std::size_t j = 1; j <= n; ++j) {
        shapes_[j - 1] = (nd + 1.0) / (2.0 * delta_T * delta_T) + (1.0 - static_cast<double>(j)) / 2.0;
        if (!(shapes_[j - 1] > 0.0)) {
            throw ModelDomainError("Gamma shape a_" + std::to_string(j) + " is not positive");
        }
        quantiles_.emplace_back(shapes_[j - 1]);
    }
}

Matrix3 FluctuationSampler::factor(std::span<const double> g) const {
    if (g.size() != field::kGermFieldCount) throw ModelDomainError("fluctuation needs 6 germ values");
    for (double v : g) {
        if (!std::isfinite(v)) throw ModelDomainError("non-finite Gaussian germ");
    }
    Matrix3 l = Matrix3::Zero();
    for (std::size_t j = 0; j < n; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        l(jj, jj) = sigma_ * std::sqrt(2.0 * quantiles_[j](g[j]));
    }
    l(0, 1) = sigma_ * g[3];
    l(0, 2) = sigma_ * g[4];
    l(1, 2) = sigma_ * g[5];
    return l;
}

Matrix3 FluctuationSampler::sample(std::span<const double> g) const {
    const Matrix3 l = factor(g);
    return l.transpose() * l;
}

namespace {

Matrix3 congruence(const Matrix3& q, const Matrix3& t) {
    Matrix3 c = q.transpose() * t * q;
    // Exact symmetry: round-off in the triple product is not symmetric.
    return 0.5 * (c + c.transpose());
}

}  // namespace

void sample_C_field(const MeanElasticity& mean, const FluctuationSampler& sampler,
                    const field::FieldEvaluator& evaluator, const field::GaussianDraw& draw,
                    std::vector<Matrix3>& out) {
    if (draw.modes != evaluator.modes()) {
        throw KleError("draw has " + std::to_string(draw.modes) + " modes, basis has " +
                       std::to_string(evaluator.modes()));
    }
    const std::size_t np = evaluator.size();
    std::array<std::vector<double>, field::kGermFieldCount> germs;
    for (std::size_t f = 0; f < field::kGermFieldCount; ++f) {
        germs[f].resize(np);
        evaluator.evaluate_into(draw.row(f), germs[f]);
    }
    out.resize(np);
    std::array<double, field::kGermFieldCount> g{};
    for (std::size_t p = 0; p < np; ++p) {
        for (std::size_t f = 0; f < field::kGermFieldCount; ++f) g[f] = germs[f][p];
        out[p] = congruence(mean.factor(), sampler.sample(g));
    }
}

std::vector<Matrix3> sample_C_field(const MeanElasticity& mean, const FluctuationSampler& sampler,
                                    const field::KleBasis& basis, const field::GaussianDraw& draw,
                                    std::span<const field::Point> points) {
    std::vector<Matrix3> out;
    sample_C_field(mean, sampler, field::FieldEvaluator(basis, points), draw, out);
    return out;
}

}  // namespace simlmc::material

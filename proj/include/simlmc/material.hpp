#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "simlmc/gaussian_draw.hpp"
#include "simlmc/kle.hpp"

namespace simlmc::material {

using Matrix3 = Eigen::Matrix3d;

// Orthotropic plane-stress constants; direction 1 = x, 2 = y.
// nu21 is the contraction along 1 under uniaxial stress along 2, so nu12 / E1 = nu21 / E2.
struct OrthotropicParams {
    double E1 = 12000e2;
    double E2 = 20000e2;
    double nu21 = 0.371;
    double G12 = 5610e2;
};

Matrix3 plane_stress_orthotropic(const OrthotropicParams& p);
Matrix3 plane_stress_isotropic(double young, double poisson);

/// Mean elasticity matrix C_bar and its upper-triangular factor Q, C_bar = Q^T Q.
class MeanElasticity {
public:
    // Throws MaterialError unless `c_bar` is symmetric positive definite.
    explicit MeanElasticity(const Matrix3& c_bar);

    const Matrix3& matrix() const noexcept { return c_bar_; }
    const Matrix3& factor() const noexcept { return q_; }

private:
    Matrix3 c_bar_;
    Matrix3 q_;
};

/// Dispersion of C implied by dispersion delta_T of the fluctuation T (n = 3):
///   delta_C = delta_T / sqrt(n + 1) * sqrt(1 + tr(C)^2 / tr(C^2)).
double dispersion_of_C(double delta_T, const Matrix3& c_bar);

/// Inverse of dispersion_of_C. Throws CalibrationError when delta_C is outside
/// (0, 1) or the resulting delta_T is outside (0, 1).
double delta_T_from_delta_C(double delta_C, const Matrix3& c_bar);

/// Gamma(shape, 1) quantile of Phi(g), solved by bracketed Newton on the
/// regularized incomplete gamma function (relative tolerance 1e-12). The upper
/// tail is used for g > 0 to keep accuracy.
double gamma_quantile_of_normal(double shape, double g);

/// gamma_quantile_of_normal(shape, .) for one fixed shape, tabulated as
/// piecewise Chebyshev interpolants of (x / shape)^(1/3) on |g| <= kRange.
/// Agrees with the root-find to about 1e-14 relative; outside the table the
/// root-find is called directly.
class GammaQuantileTable {
public:
    static constexpr double kRange = 8.0;
    static constexpr std::size_t kPieces = 128;
    static constexpr std::size_t kDegree = 14;

    explicit GammaQuantileTable(double shape);

    double shape() const noexcept { return shape_; }
    double operator()(double g) const;

private:
    double shape_;
    std::vector<double> coeffs_;  // kPieces x (kDegree + 1)
};

/// Maximum-entropy SPD fluctuation T = L^T L with E[T] = I.
/// Germ ordering: g[0..2] diagonal entries (1,1),(2,2),(3,3); g[3], g[4], g[5]
/// off-diagonal entries (1,2), (1,3), (2,3).
class FluctuationSampler {
public:
    static constexpr std::size_t n = 3;

    // Throws ModelDomainError unless 0 < delta_T < 1.
    explicit FluctuationSampler(double delta_T);

    double delta_T() const noexcept { return delta_T_; }
    double sigma() const noexcept { return sigma_; }
    // Gamma shape a_j for 1-based row j.
    double shape(std::size_t j) const { return shapes_.at(j - 1); }

    Matrix3 factor(std::span<const double> g) const;
    Matrix3 sample(std::span<const double> g) const;

private:
    double delta_T_;
    double sigma_;
    std::array<double, n> shapes_{};
    std::vector<GammaQuantileTable> quantiles_;
};

/// C(x) = Q^T T(x) Q at each point, T driven by the six germ fields of `draw`.
std::vector<Matrix3> sample_C_field(const MeanElasticity& mean, const FluctuationSampler& sampler,
                                    const field::KleBasis& basis, const field::GaussianDraw& draw,
                                    std::span<const field::Point> points);

/// Same as above on a pre-located point set; `out` is resized to the point count.
void sample_C_field(const MeanElasticity& mean, const FluctuationSampler& sampler,
                    const field::FieldEvaluator& evaluator, const field::GaussianDraw& draw,
                    std::vector<Matrix3>& out);

}  // namespace simlmc::material

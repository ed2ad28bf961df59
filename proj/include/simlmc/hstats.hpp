#pragma once

#include <cstdint>
#include <span>

namespace simlmc::stats {

// Raw power sums S_r = sum x_i^r of one sample set.
struct UnivariateSums {
    std::uint64_t n = 0;
    double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
};

// Raw power and cross sums of paired samples (x_i, y_i).
struct BivariateSums {
    std::uint64_t n = 0;
    double x1 = 0.0, x2 = 0.0, x3 = 0.0, x4 = 0.0;
    double y1 = 0.0, y2 = 0.0, y3 = 0.0, y4 = 0.0;
    double xy = 0.0, x2y = 0.0, xy2 = 0.0, x2y2 = 0.0;

    UnivariateSums x() const { return {n, x1, x2, x3, x4}; }
    UnivariateSums y() const { return {n, y1, y2, y3, y4}; }
};

UnivariateSums power_sums(std::span<const double> x);
BivariateSums power_sums(std::span<const double> x, std::span<const double> y);

/// Unbiased variance (S2 - S1^2 / n) / (n - 1). Throws InsufficientSamplesError for n < 2.
double h2(double s1, double s2, std::uint64_t n);
double h2(const UnivariateSums& s);

// Biased sample central moments m_r = (1/n) sum (x_i - mean)^r.
struct CentralMoments {
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
};
CentralMoments central_moments(const UnivariateSums& s);

struct CrossMoments {
    double m20 = 0.0, m02 = 0.0, m11 = 0.0, m22 = 0.0;
};
CrossMoments cross_moments(const BivariateSums& s);

/// Var(h2) = mu4 / n - sigma^4 (n - 3) / (n (n - 1)).
double h2_variance(double mu4, double sigma4, std::uint64_t n);

/// Cov(h2(X), h2(Y)) = (mu22 - sx^2 sy^2) / n + 2 sxy^2 / (n (n - 1)).
double h2_covariance(double mu22, double var_product, double cov_squared, std::uint64_t n);

// Unbiased estimates of mu4 and sigma^4 (n >= 4).
struct FourthOrderEstimates {
    double mu4 = 0.0;
    double sigma4 = 0.0;
};
FourthOrderEstimates unbiased_fourth_order(const UnivariateSums& s);

// Unbiased estimates of mu22, sx^2 sy^2 and sxy^2 (n >= 4).
struct CrossFourthOrderEstimates {
    double mu22 = 0.0;
    double var_product = 0.0;
    double cov_squared = 0.0;
};
CrossFourthOrderEstimates unbiased_cross_fourth_order(const BivariateSums& s);

/// Unbiased estimate of Var(h2) from power sums; negative results clamp to 0.
double var_of_h2(const UnivariateSums& s);

/// Unbiased estimate of Cov(h2(X), h2(Y)) from paired power sums.
double cov_of_h2_pair(const BivariateSums& s);

/// Unbiased estimate of Var(h2(X) - h2(Y)); negative results clamp to 0.
double var_of_h2_difference(const BivariateSums& s);

/// Unbiased sample covariance k11 = (S_xy - S_x S_y / n) / (n - 1).
double k11(const BivariateSums& s);

/// Var(k11) = mu22 / n + sx^2 sy^2 / (n (n - 1)) - sxy^2 (n - 2) / (n (n - 1)).
double k11_variance(double mu22, double var_product, double cov_squared, std::uint64_t n);

/// Unbiased estimate of Var(k11) from paired power sums; negative results clamp to 0.
/// With D = X - Y and S = X + Y, k11(D, S) = h2(X) - h2(Y) exactly, so this is
/// the well-conditioned route to Var(h2(X) - h2(Y)) when X and Y are close.
double var_of_k11(const BivariateSums& s);

// Number of negative variance estimates clamped to zero so far (process-wide).
std::uint64_t clamped_negative_count();

}  // namespace simlmc::stats

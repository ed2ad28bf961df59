#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "simlmc/mesh.hpp"

namespace simlmc::field {

using fem::Point;

/// Squared-exponential covariance  variance * exp(-(dx/lx)^2 - (dy/ly)^2).
struct CovarianceKernel {
    double lx = 3.5;
    double ly = 3.5;
    double variance = 1.0;

    double operator()(Point a, Point b) const;
    // Throws KleError unless lx, ly, variance are positive and finite.
    void validate() const;
};

/// Truncated Karhunen-Loeve basis on the nodes of a reference mesh.
/// Eigenfunctions are orthonormal in the lumped-mass inner product; between
/// nodes they are evaluated by bilinear interpolation on the reference mesh.
class KleBasis {
public:
    KleBasis(fem::Mesh2D reference, Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenvectors,
             Eigen::VectorXd mass, double captured_fraction, double truncation_tail);

    std::size_t modes() const noexcept { return static_cast<std::size_t>(eigenvalues_.size()); }
    std::size_t node_count() const noexcept { return static_cast<std::size_t>(eigenvectors_.rows()); }
    const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
    // node_count x modes; column k holds phi_k at the reference nodes.
    const Eigen::MatrixXd& eigenvectors() const noexcept { return eigenvectors_; }
    // Lumped mass weight per reference node.
    const Eigen::VectorXd& mass() const noexcept { return mass_; }
    double captured_fraction() const noexcept { return captured_fraction_; }
    // Sum of |lambda_k| over discarded modes.
    double truncation_tail() const noexcept { return truncation_tail_; }
    const fem::Mesh2D& reference_mesh() const noexcept { return reference_; }
    const fem::PointLocator& locator() const noexcept { return *locator_; }

    double eigenfunction(std::size_t k, Point p) const;

private:
    fem::Mesh2D reference_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
    Eigen::VectorXd mass_;
    double captured_fraction_;
    double truncation_tail_;
    std::shared_ptr<const fem::PointLocator> locator_;
};

/// Nystrom eigenproblem of the kernel on reference-mesh nodes with lumped mass
/// weighting; keeps the top `modes` eigenpairs. Eigenvalues in [-1e-8 lambda_1, 0)
/// are clamped to zero; anything more negative raises KleError.
KleBasis build_kle(const CovarianceKernel& kernel, const fem::Mesh2D& reference, std::size_t modes);

/// The basis restricted to a fixed point set: row p holds sqrt(lambda_k) phi_k(x_p).
/// Values at coordinate-identical points are bitwise identical.
class FieldEvaluator {
public:
    FieldEvaluator(const KleBasis& basis, std::span<const Point> points);

    std::size_t size() const noexcept { return points_; }
    std::size_t modes() const noexcept { return modes_; }

    std::vector<double> evaluate(std::span<const double> xi) const;
    void evaluate_into(std::span<const double> xi, std::span<double> out) const;

private:
    std::size_t points_ = 0;
    std::size_t modes_ = 0;
    std::vector<double> rows_;  // points_ x modes_, row-major
};

/// g(x) = sum_k sqrt(lambda_k) phi_k(x) xi_k at each point.
std::vector<double> evaluate_field(const KleBasis& basis, std::span<const double> xi,
                                   std::span<const Point> points);

// Binary cache: little-endian float64 header (modes, node count, captured
// fraction), eigenvalues, then the modes x nodes eigenvector block row-major.
void save_kle_cache(const std::filesystem::path& path, const KleBasis& basis);
KleBasis load_kle_cache(const std::filesystem::path& path, const fem::Mesh2D& reference);

}  // namespace simlmc::field

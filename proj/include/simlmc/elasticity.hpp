#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <memory>
#include <span>
#include <vector>

#include "simlmc/mesh.hpp"

namespace simlmc::fem {

using Matrix3 = Eigen::Matrix3d;
using ElementMatrix = Eigen::Matrix<double, 8, 8>;

struct DisplacementField {
    int level = 0;
    std::vector<Eigen::Vector2d> u;  // cm
    std::vector<double> total;       // |u| per node, cm
};

// Nonzero (or zero) prescribed value on one displacement component.
struct PrescribedDisplacement {
    std::size_t node = 0;
    Axis axis = Axis::x;
    double value = 0.0;
};

/// Plane-stress bilinear quad stiffness (unit thickness) with 2x2 Gauss quadrature.
/// `material[q]` is the Voigt matrix at Gauss point q (ordering as kGaussPoints).
ElementMatrix element_stiffness(const std::array<Point, 4>& xy, std::span<const Matrix3> material);

// Throws MaterialError unless every matrix is finite, symmetric (1e-12 relative) and SPD.
void check_material(std::span<const Matrix3> material);

/// Full (unconstrained) global stiffness; 2*node + axis dof numbering.
Eigen::SparseMatrix<double> assemble_stiffness(const Mesh2D& mesh, std::span<const Matrix3> material);

/// Consistent nodal forces of the mesh's Neumann tractions, scaled so the
/// resultant has magnitude `load_resultant` (N). Zero resultant gives zero load.
Eigen::VectorXd traction_load(const Mesh2D& mesh, double load_resultant);

/// Sparse direct solver bound to one mesh. The sparsity pattern, constraint
/// elimination map and fill-reducing ordering are computed once; each solve
/// refills values and refactorizes. solve() is safe to call concurrently.
class ElasticitySolver {
public:
    explicit ElasticitySolver(const Mesh2D& mesh, std::vector<PrescribedDisplacement> prescribed = {});
    ~ElasticitySolver();
    ElasticitySolver(const ElasticitySolver&) = delete;
    ElasticitySolver& operator=(const ElasticitySolver&) = delete;

    /// Material at all 4 Gauss points of every element (element-major).
    /// Throws MaterialError for non-SPD input, SolverError for singular systems
    /// or when the relative residual exceeds 1e-10.
    DisplacementField solve(std::span<const Matrix3> material, const Eigen::VectorXd& force) const;

    const Mesh2D& mesh() const noexcept { return mesh_; }
    std::size_t free_dof_count() const noexcept { return free_count_; }

    // Relative residual ||K u - F|| / ||F|| on free dofs of the last solve on this thread.
    static double last_relative_residual();

private:
    struct Workspace;
    std::unique_ptr<Workspace> acquire() const;
    void release(std::unique_ptr<Workspace> ws) const;

    Mesh2D mesh_;
    std::vector<double> prescribed_value_;   // per dof, NaN when free
    std::vector<std::ptrdiff_t> free_index_; // per dof, -1 when constrained
    std::size_t free_count_ = 0;
    Eigen::SparseMatrix<double> pattern_;
    std::vector<std::array<std::ptrdiff_t, 64>> scatter_;  // element entry -> value slot
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper: Neumann load scaled to `load_resultant`.
DisplacementField assemble_and_solve(const Mesh2D& mesh, std::span<const Matrix3> material,
                                     double load_resultant);

/// Total displacement at the level-0 common nodes, ordered by level-0 node id.
std::vector<double> extract_qoi(const DisplacementField& field, const MeshHierarchy& hierarchy);

}  // namespace simlmc::fem

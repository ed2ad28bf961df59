#include "simlmc/elasticity.hpp"

#include <Eigen/Cholesky>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>

#include "simlmc/error.hpp"

namespace simlmc::fem {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Ldlt = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

thread_local double g_last_residual = 0.0;

std::size_t dof(std::size_t node, Axis axis) { return 2 * node + static_cast<std::size_t>(axis); }

}  // namespace

ElementMatrix element_stiffness(const std::array<Point, 4>& xy, std::span<const Matrix3> material) {
    ElementMatrix ke = ElementMatrix::Zero();
    for (std::size_t q = 0; q < kGaussPerElement; ++q) {
        const double xi = kGaussPoints[q][0];
        const double eta = kGaussPoints[q][1];
        const auto d = shape_derivatives(xi, eta);
        double j00 = 0, j01 = 0, j10 = 0, j11 = 0;
        for (std::size_t a = 0; a < 4; ++a) {
            j00 += d[0][a] * xy[a].x;
            j01 += d[0][a] * xy[a].y;
            j10 += d[1][a] * xy[a].x;
            j11 += d[1][a] * xy[a].y;
        }
        const double det = j00 * j11 - j01 * j10;
        Eigen::Matrix<double, 3, 8> b = Eigen::Matrix<double, 3, 8>::Zero();
        for (std::size_t a = 0; a < 4; ++a) {
            // Inverse Jacobian applied to reference derivatives.
            const double nx = (j11 * d[0][a] - j01 * d[1][a]) / det;
            const double ny = (-j10 * d[0][a] + j00 * d[1][a]) / det;
            const auto c = static_cast<Eigen::Index>(2 * a);
            b(0, c) = nx;
            b(1, c + 1) = ny;
            b(2, c) = ny;
            b(2, c + 1) = nx;
        }
        ke.noalias() += b.transpose() * material[q] * b * det;
    }
    return ke;
}

void check_material(std::span<const Matrix3> material) {
    for (std::size_t i = 0; i < material.size(); ++i) {
        const Matrix3& c = material[i];
        if (!c.allFinite()) throw MaterialError("material " + std::to_string(i) + " is not finite");
        const double scale = c.cwiseAbs().maxCoeff();
        if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
            throw MaterialError("material " + std::to_string(i) + " is not symmetric");
        }
        Eigen::LLT<Matrix3> llt(c);
        if (llt.info() != Eigen::Success || !(llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0)) {
            throw MaterialError("material " + std::to_string(i) + " is not positive definite");
        }
    }
}

Eigen::SparseMatrix<double> assemble_stiffness(const Mesh2D& mesh, std::span<const Matrix3> material) {
    if (material.size() != mesh.element_count() * kGaussPerElement) {
        throw MaterialError("material count does not match 4 Gauss points per element");
    }
    check_material(material);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(mesh.element_count() * 64);
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const auto ke = element_stiffness(mesh.element_coordinates(e), material.subspan(4 * e, 4));
        const auto& el = mesh.elements[e];
        for (std::size_t a = 0; a < 8; ++a) {
            for (std::size_t b = 0; b < 8; ++b) {
                triplets.emplace_back(static_cast<int>(2 * el[a / 2] + a % 2),
                                      static_cast<int>(2 * el[b / 2] + b % 2),
                                      ke(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(mesh.dof_count());
    SparseMatrix k(n, n);
    k.setFromTriplets(triplets.begin(), triplets.end());
    return k;
}

Eigen::VectorXd traction_load(const Mesh2D& mesh, double load_resultant) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.dof_count()));
    double rx = 0.0, ry = 0.0;
    for (const auto& ne : mesh.neumann_edges) {
        const auto& el = mesh.elements[ne.element];
        const auto a = el[static_cast<std::size_t>(ne.edge)];
        const auto b = el[static_cast<std::size_t>((ne.edge + 1) % 4)];
        const double len = std::hypot(mesh.nodes[b].x - mesh.nodes[a].x, mesh.nodes[b].y - mesh.nodes[a].y);
        for (auto n : {a, b}) {
            f(static_cast<Eigen::Index>(2 * n)) += 0.5 * len * ne.tx;
            f(static_cast<Eigen::Index>(2 * n + 1)) += 0.5 * len * ne.ty;
        }
        rx += len * ne.tx;
        ry += len * ne.ty;
    }
    const double r = std::hypot(rx, ry);
    if (load_resultant == 0.0 || r == 0.0) return Eigen::VectorXd::Zero(f.size());
    return f * (load_resultant / r);
}

struct ElasticitySolver::Workspace {
    SparseMatrix k;
    Ldlt ldlt;
    Eigen::VectorXd rhs;
};

struct ElasticitySolver::Impl {
    std::mutex mutex;
    std::vector<std::unique_ptr<Workspace>> pool;
};

ElasticitySolver::ElasticitySolver(const Mesh2D& mesh, std::vector<PrescribedDisplacement> prescribed)
    : mesh_(mesh), impl_(std::make_unique<Impl>()) {
    validate(mesh_);
    const std::size_t ndof = mesh_.dof_count();
    prescribed_value_.assign(ndof, std::numeric_limits<double>::quiet_NaN());
    for (auto n : mesh_.dirichlet_nodes) {
        prescribed_value_[dof(n, Axis::x)] = 0.0;
        prescribed_value_[dof(n, Axis::y)] = 0.0;
    }
    for (const auto& r : mesh_.rollers) prescribed_value_[dof(r.node, r.axis)] = 0.0;
    for (const auto& p : prescribed) {
        if (p.node >= mesh_.node_count()) throw MeshError("prescribed displacement on unknown node");
        prescribed_value_[dof(p.node, p.axis)] = p.value;
    }

    free_index_.assign(ndof, -1);
    for (std::size_t i = 0; i < ndof; ++i) {
        if (std::isnan(prescribed_value_[i])) free_index_[i] = static_cast<std::ptrdiff_t>(free_count_++);
    }
    if (ndof - free_count_ < 3) {
        throw SolverError("fewer than 3 constrained degrees of freedom: rigid-body motion is not suppressed");
    }
    if (free_count_ == 0) throw SolverError("no free degrees of freedom");

    std::vector<Eigen::Triplet<double>> triplets;
    for (const auto& el : mesh_.elements) {
        for (std::size_t a = 0; a < 8; ++a) {
            const auto fa = free_index_[2 * el[a / 2] + a % 2];
            if (fa < 0) continue;
            for (std::size_t b = 0; b < 8; ++b) {
                const auto fb = free_index_[2 * el[b / 2] + b % 2];
                if (fb >= 0) triplets.emplace_back(static_cast<int>(fa), static_cast<int>(fb), 1.0);
            }
        }
    }
    const auto nf = static_cast<Eigen::Index>(free_count_);
    pattern_.resize(nf, nf);
    pattern_.setFromTriplets(triplets.begin(), triplets.end());
    pattern_.makeCompressed();

    scatter_.resize(mesh_.element_count());
    for (std::size_t e = 0; e < mesh_.element_count(); ++e) {
        const auto& el = mesh_.elements[e];
        for (std::size_t a = 0; a < 8; ++a) {
            const auto fa = free_index_[2 * el[a / 2] + a % 2];
            for (std::size_t b = 0; b < 8; ++b) {
                const auto fb = free_index_[2 * el[b / 2] + b % 2];
                std::ptrdiff_t slot = -1;
                if (fa >= 0 && fb >= 0) {
                    // Column-major: locate row fa inside column fb.
                    const auto* outer = pattern_.outerIndexPtr();
                    const auto* inner = pattern_.innerIndexPtr();
                    for (auto k = outer[fb]; k < outer[fb + 1]; ++k) {
                        if (inner[k] == fa) {
                            slot = k;
                            break;
                        }
                    }
                }
                scatter_[e][a * 8 + b] = slot;
            }
        }
    }
}

ElasticitySolver::~ElasticitySolver() = default;

std::unique_ptr<ElasticitySolver::Workspace> ElasticitySolver::acquire() const {
    {
        std::lock_guard lock(impl_->mutex);
        if (!impl_->pool.empty()) {
            auto ws = std::move(impl_->pool.back());
            impl_->pool.pop_back();
            return ws;
        }
    }
    auto ws = std::make_unique<Workspace>();
    ws->k = pattern_;
    ws->ldlt.analyzePattern(ws->k);
    return ws;
}

void ElasticitySolver::release(std::unique_ptr<Workspace> ws) const {
    std::lock_guard lock(impl_->mutex);
    impl_->pool.push_back(std::move(ws));
}

double ElasticitySolver::last_relative_residual() { return g_last_residual; }

DisplacementField ElasticitySolver::solve(std::span<const Matrix3> material, const Eigen::VectorXd& force) const {
    if (material.size() != mesh_.element_count() * kGaussPerElement) {
        throw MaterialError("material count " + std::to_string(material.size()) + " does not match " +
                            std::to_string(mesh_.element_count() * kGaussPerElement) + " Gauss points");
    }
    if (static_cast<std::size_t>(force.size()) != mesh_.dof_count()) {
        throw SolverError("force vector length does not match dof count");
    }
    check_material(material);

    auto ws = acquire();
    auto* values = ws->k.valuePtr();
    std::fill(values, values + ws->k.nonZeros(), 0.0);
    ws->rhs.resize(static_cast<Eigen::Index>(free_count_));
    for (std::size_t i = 0; i < mesh_.dof_count(); ++i) {
        if (free_index_[i] >= 0) ws->rhs(free_index_[i]) = force(static_cast<Eigen::Index>(i));
    }

    for (std::size_t e = 0; e < mesh_.element_count(); ++e) {
        const auto ke = element_stiffness(mesh_.element_coordinates(e), material.subspan(4 * e, 4));
        const auto& el = mesh_.elements[e];
        const auto& slots = scatter_[e];
        for (std::size_t a = 0; a < 8; ++a) {
            const auto fa = free_index_[2 * el[a / 2] + a % 2];
            if (fa < 0) continue;
            for (std::size_t b = 0; b < 8; ++b) {
                const double kab = ke(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                const auto slot = slots[a * 8 + b];
                if (slot >= 0) {
                    values[slot] += kab;
                } else {
                    const double ub = prescribed_value_[2 * el[b / 2] + b % 2];
                    if (ub != 0.0) ws->rhs(fa) -= kab * ub;
                }
            }
        }
    }

    Eigen::VectorXd uf = Eigen::VectorXd::Zero(ws->rhs.size());
    const double rhs_norm = ws->rhs.norm();
    if (rhs_norm > 0.0) {
        ws->ldlt.factorize(ws->k);
        if (ws->ldlt.info() != Eigen::Success) {
            release(std::move(ws));
            throw SolverError("stiffness factorization failed (singular system)");
        }
        const auto& d = ws->ldlt.vectorD();
        const double dmax = d.cwiseAbs().maxCoeff();
        if (!(d.minCoeff() > 1e-13 * dmax)) {
            release(std::move(ws));
            throw SolverError("stiffness matrix is singular or indefinite (check Dirichlet boundary)");
        }
        uf = ws->ldlt.solve(ws->rhs);
        const double res = (ws->k * uf - ws->rhs).norm() / rhs_norm;
        g_last_residual = res;
        if (!(res <= 1e-10)) {
            release(std::move(ws));
            throw SolverError("relative residual " + std::to_string(res) + " exceeds 1e-10");
        }
    } else {
        g_last_residual = 0.0;
    }
    release(std::move(ws));

    DisplacementField field;
    field.level = mesh_.level;
    field.u.resize(mesh_.node_count());
    field.total.resize(mesh_.node_count());
    for (std::size_t n = 0; n < mesh_.node_count(); ++n) {
        for (std::size_t c = 0; c < 2; ++c) {
            const std::size_t i = 2 * n + c;
            field.u[n](static_cast<Eigen::Index>(c)) =
                free_index_[i] >= 0 ? uf(free_index_[i]) : prescribed_value_[i];
        }
        field.total[n] = field.u[n].norm();
    }
    return field;
}

DisplacementField assemble_and_solve(const Mesh2D& mesh, std::span<const Matrix3> material,
                                     double load_resultant) {
    ElasticitySolver solver(mesh);
    return solver.solve(material, traction_load(mesh, load_resultant));
}

std::vector<double> extract_qoi(const DisplacementField& field, const MeshHierarchy& hierarchy) {
    if (field.level < 0 || static_cast<std::size_t>(field.level) >= hierarchy.level_count()) {
        throw Error("displacement field level " + std::to_string(field.level) + " not in hierarchy");
    }
    const auto& mesh = hierarchy.meshes[static_cast<std::size_t>(field.level)];
    if (field.total.size() != mesh.node_count()) {
        throw Error("displacement field size does not match the level-" + std::to_string(field.level) + " mesh");
    }
    const auto& map = hierarchy.common_nodes[static_cast<std::size_t>(field.level)];
    std::vector<double> qoi(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) qoi[i] = field.total[map[i]];
    return qoi;
}

}  // namespace simlmc::fem

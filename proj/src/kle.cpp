#include "simlmc/kle.hpp"

#include <Eigen/Eigenvalues>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "simlmc/error.hpp"

namespace simlmc::field {

double CovarianceKernel::operator()(Point a, Point b) const {
    const double dx = (a.x - b.x) / lx;
    const double dy = (a.y - b.y) / ly;
    return variance * std::exp(-(dx * dx + dy * dy));
}

void CovarianceKernel::validate() const {
    if (!(lx > 0.0) || !std::isfinite(lx)) throw KleError("correlation length lx must be positive");
    if (!(ly > 0.0) || !std::isfinite(ly)) throw KleError("correlation length ly must be positive");
    if (!(variance > 0.0) || !std::isfinite(variance)) throw KleError("kernel variance must be positive");
}

KleBasis::KleBasis(fem::Mesh2D reference, Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenvectors,
                   Eigen::VectorXd mass, double captured_fraction, double truncation_tail)
    : reference_(std::move(reference)),
      eigenvalues_(std::move(eigenvalues)),
      eigenvectors_(std::move(eigenvectors)),
      mass_(std::move(mass)),
      captured_fraction_(captured_fraction),
      truncation_tail_(truncation_tail),
      locator_(std::make_shared<fem::PointLocator>(reference_)) {}

double KleBasis::eigenfunction(std::size_t k, Point p) const {
    const auto s = locator_->stencil(p);
    double v = 0.0;
    for (std::size_t a = 0; a < 4; ++a) {
        v += s.weights[a] * eigenvectors_(static_cast<Eigen::Index>(s.nodes[a]), static_cast<Eigen::Index>(k));
    }
    return v;
}

namespace {

Eigen::VectorXd lumped_mass(const fem::Mesh2D& mesh) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.node_count()));
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const auto xy = mesh.element_coordinates(e);
        const auto& el = mesh.elements[e];
        for (const auto& g : fem::kGaussPoints) {
            const auto n = fem::shape_functions(g[0], g[1]);
            const double det = fem::jacobian_determinant(xy, g[0], g[1]);
            for (std::size_t a = 0; a < 4; ++a) w(static_cast<Eigen::Index>(el[a])) += n[a] * det;
        }
    }
    return w;
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    const double vmax = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-8 * vmax) {
            if (v(i) < 0.0) v = -v;
            return;
        }
    }
}

}  // namespace

KleBasis build_kle(const CovarianceKernel& kernel, const fem::Mesh2D& reference, std::size_t modes) {
    kernel.validate();
    const std::size_t n = reference.node_count();
    if (modes < 1) throw KleError("KLE needs at least one mode");
    if (modes > n) {
        throw KleError("KLE order " + std::to_string(modes) + " exceeds reference node count " + std::to_string(n));
    }
    const Eigen::VectorXd w = lumped_mass(reference);
    const Eigen::VectorXd sw = w.cwiseSqrt();
    const auto ni = static_cast<Eigen::Index>(n);

    // Symmetrized operator W^1/2 C W^1/2.
    Eigen::MatrixXd b(ni, ni);
    for (Eigen::Index i = 0; i < ni; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double c = kernel(reference.nodes[static_cast<std::size_t>(i)], reference.nodes[static_cast<std::size_t>(j)]);
            b(i, j) = b(j, i) = sw(i) * c * sw(j);
        }
    }
    const double trace = b.trace();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
    if (eig.info() != Eigen::Success) throw KleError("covariance eigen-decomposition failed");
    const Eigen::VectorXd& all = eig.eigenvalues();  // ascending
    const double lambda_max = all(ni - 1);
    if (!(lambda_max > 0.0)) throw KleError("covariance operator has no positive eigenvalue");
    if (all(0) < -1e-8 * lambda_max) {
        throw KleError("covariance matrix is not positive semidefinite (eigenvalue " +
                       std::to_string(all(0)) + ")");
    }

    const auto m = static_cast<Eigen::Index>(modes);
    Eigen::VectorXd lambda(m);
    Eigen::MatrixXd phi(ni, m);
    double kept = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        const Eigen::Index src = ni - 1 - k;
        lambda(k) = std::max(all(src), 0.0);
        kept += lambda(k);
        phi.col(k) = eig.eigenvectors().col(src).cwiseQuotient(sw);
        fix_sign(phi.col(k));
    }
    double tail = 0.0;
    for (Eigen::Index k = 0; k < ni - m; ++k) tail += std::abs(all(k));
    const double captured = std::min(kept / trace, 1.0);
    return KleBasis(reference, std::move(lambda), std::move(phi), w, captured, tail);
}

FieldEvaluator::FieldEvaluator(const KleBasis& basis, std::span<const Point> points)
    : points_(points.size()), modes_(basis.modes()), rows_(points.size() * basis.modes()) {
    const auto& phi = basis.eigenvectors();
    const auto& lambda = basis.eigenvalues();
    for (std::size_t p = 0; p < points_; ++p) {
        const auto s = basis.locator().stencil(points[p]);
        for (std::size_t k = 0; k < modes_; ++k) {
            double v = 0.0;
            for (std::size_t a = 0; a < 4; ++a) {
                v += s.weights[a] * phi(static_cast<Eigen::Index>(s.nodes[a]), static_cast<Eigen::Index>(k));
            }
            rows_[p * modes_ + k] = std::sqrt(lambda(static_cast<Eigen::Index>(k))) * v;
        }
    }
}

std::vector<double> FieldEvaluator::evaluate(std::span<const double> xi) const {
    std::vector<double> out(points_);
    evaluate_into(xi, out);
    return out;
}

void FieldEvaluator::evaluate_into(std::span<const double> xi, std::span<double> out) const {
    if (xi.size() != modes_) {
        throw KleError("coefficient vector has " + std::to_string(xi.size()) + " entries, basis has " +
                       std::to_string(modes_) + " modes");
    }
    if (out.size() != points_) throw KleError("output span does not match the point count");
    for (std::size_t p = 0; p < points_; ++p) {
        const double* row = rows_.data() + p * modes_;
        double v = 0.0;
        for (std::size_t k = 0; k < modes_; ++k) v += row[k] * xi[k];
        out[p] = v;
    }
}

std::vector<double> evaluate_field(const KleBasis& basis, std::span<const double> xi,
                                   std::span<const Point> points) {
    return FieldEvaluator(basis, points).evaluate(xi);
}

namespace {

void write_f64(std::ostream& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xffu);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

double read_f64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw KleError("truncated KLE cache file");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

void save_kle_cache(const std::filesystem::path& path, const KleBasis& basis) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw KleError("cannot write KLE cache " + path.string());
    write_f64(out, static_cast<double>(basis.modes()));
    write_f64(out, static_cast<double>(basis.node_count()));
    write_f64(out, basis.captured_fraction());
    for (Eigen::Index k = 0; k < basis.eigenvalues().size(); ++k) write_f64(out, basis.eigenvalues()(k));
    for (Eigen::Index k = 0; k < basis.eigenvectors().cols(); ++k) {
        for (Eigen::Index i = 0; i < basis.eigenvectors().rows(); ++i) write_f64(out, basis.eigenvectors()(i, k));
    }
}

KleBasis load_kle_cache(const std::filesystem::path& path, const fem::Mesh2D& reference) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw KleError("cannot open KLE cache " + path.string());
    const double m_raw = read_f64(in);
    const double n_raw = read_f64(in);
    const double captured = read_f64(in);
    if (!(m_raw >= 1.0) || !(n_raw >= 1.0) || m_raw != std::floor(m_raw) || n_raw != std::floor(n_raw)) {
        throw KleError("corrupt KLE cache header");
    }
    const auto m = static_cast<Eigen::Index>(m_raw);
    const auto n = static_cast<Eigen::Index>(n_raw);
    if (static_cast<std::size_t>(n) != reference.node_count()) {
        throw KleError("KLE cache node count " + std::to_string(n) + " does not match reference mesh");
    }
    Eigen::VectorXd lambda(m);
    for (Eigen::Index k = 0; k < m; ++k) lambda(k) = read_f64(in);
    Eigen::MatrixXd phi(n, m);
    for (Eigen::Index k = 0; k < m; ++k)
        for (Eigen::Index i = 0; i < n; ++i) phi(i, k) = read_f64(in);
    const double tail = captured > 0.0 ? lambda.sum() * (1.0 / captured - 1.0) : 0.0;
    return KleBasis(reference, std::move(lambda), std::move(phi), lumped_mass(reference), captured, tail);
}

}  // namespace simlmc::field

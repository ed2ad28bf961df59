#include "simlmc/validation.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <sstream>

#include "simlmc/elasticity.hpp"
#include "simlmc/error.hpp"
#include "simlmc/gaussian_draw.hpp"
#include "simlmc/hstats.hpp"
#include "simlmc/kle.hpp"
#include "simlmc/material.hpp"

namespace simlmc::validation {

namespace {

std::string sci(double v) {
    std::ostringstream s;
    s.precision(3);
    s << std::scientific << v;
    return s.str();
}

// Calls f on every length-n sequence over {0..k-1}.
void for_each_sequence(std::size_t k, std::size_t n, const std::function<void(const std::vector<std::size_t>&)>& f) {
    std::vector<std::size_t> idx(n, 0);
    while (true) {
        f(idx);
        std::size_t pos = 0;
        while (pos < n && ++idx[pos] == k) idx[pos++] = 0;
        if (pos == n) return;
    }
}

CheckResult check_round_trip(const config::ExperimentConfig& c) {
    if (c.material.delta_C == 0.0) return {"delta_C_round_trip", true, "deterministic material, skipped"};
    const auto mean = c.mean_matrix();
    const double dT = material::delta_T_from_delta_C(c.material.delta_C, mean);
    const double back = material::dispersion_of_C(dT, mean);
    const double err = std::abs(back - c.material.delta_C);
    return {"delta_C_round_trip", err <= 1e-14, "delta_T " + sci(dT) + ", round-trip error " + sci(err)};
}

CheckResult check_spd_sampling(const config::ExperimentConfig& c) {
    const double dC = c.material.delta_C > 0.0 ? c.material.delta_C : 0.1;
    const material::MeanElasticity mean(c.mean_matrix());
    const material::FluctuationSampler sampler(material::delta_T_from_delta_C(dC, mean.matrix()));
    constexpr int kSamples = 2000;
    int bad = 0;
    double worst_asym = 0.0;
    std::array<double, 6> g{};
    for (int s = 0; s < kSamples; ++s) {
        for (std::uint32_t f = 0; f < 6; ++f) g[f] = field::standard_normal(c.mlmc.seed, static_cast<std::uint64_t>(s), f, 0);
        const material::Matrix3 t = sampler.sample(g);
        material::Matrix3 cm = mean.factor().transpose() * t * mean.factor();
        cm = 0.5 * (cm + cm.transpose());
        Eigen::SelfAdjointEigenSolver<material::Matrix3> eig(t);
        Eigen::SelfAdjointEigenSolver<material::Matrix3> eigc(cm);
        if (!(eig.eigenvalues().minCoeff() > 0.0) || !(eigc.eigenvalues().minCoeff() > 0.0)) ++bad;
        worst_asym = std::max(worst_asym, (t - t.transpose()).cwiseAbs().maxCoeff() / t.cwiseAbs().maxCoeff());
    }
    return {"spd_sampling", bad == 0 && worst_asym <= 1e-12,
            std::to_string(kSamples - bad) + "/" + std::to_string(kSamples) + " SPD realizations"};
}

CheckResult check_patch(const config::ExperimentConfig& c) {
    // Two-by-two patch with a displaced interior node; linear boundary displacement.
    fem::Mesh2D mesh;
    mesh.nodes = {{0, 0}, {1, 0}, {2, 0}, {0, 1}, {1.17, 0.91}, {2, 1}, {0, 2}, {1, 2}, {2, 2}};
    mesh.elements = {{0, 1, 4, 3}, {1, 2, 5, 4}, {3, 4, 7, 6}, {4, 5, 8, 7}};
    auto exact = [](fem::Point p) { return Eigen::Vector2d(1e-3 + 2e-3 * p.x - 1e-3 * p.y, -5e-4 + 7e-4 * p.x + 3e-3 * p.y); };
    std::vector<fem::PrescribedDisplacement> bc;
    for (std::size_t n = 0; n < mesh.node_count(); ++n) {
        if (n == 4) continue;
        const auto u = exact(mesh.nodes[n]);
        bc.push_back({n, fem::Axis::x, u(0)});
        bc.push_back({n, fem::Axis::y, u(1)});
    }
    const fem::ElasticitySolver solver(mesh, bc);
    const std::vector<material::Matrix3> mat(mesh.element_count() * fem::kGaussPerElement, c.mean_matrix());
    const auto field = solver.solve(mat, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.dof_count())));
    const double err = (field.u[4] - exact(mesh.nodes[4])).cwiseAbs().maxCoeff() / exact(mesh.nodes[4]).norm();
    return {"patch_test", err <= 1e-10, "interior node relative error " + sci(err)};
}

CheckResult check_h2_unbiased() {
    const std::vector<double> pop = {0.0, 1.0, 2.0};
    double sum = 0.0;
    std::size_t count = 0;
    for_each_sequence(3, 3, [&](const std::vector<std::size_t>& idx) {
        std::vector<double> x;
        for (auto i : idx) x.push_back(pop[i]);
        sum += stats::h2(stats::power_sums(x));
        ++count;
    });
    const double err = std::abs(sum / static_cast<double>(count) - 2.0 / 3.0);
    return {"h2_unbiased_enumeration", err <= 1e-12, "error " + sci(err)};
}

CheckResult check_var_h2() {
    constexpr std::size_t n = 5;
    double s1 = 0.0, s2 = 0.0;
    std::size_t count = 0;
    for_each_sequence(2, n, [&](const std::vector<std::size_t>& idx) {
        std::vector<double> x(idx.begin(), idx.end());
        const double h = stats::h2(stats::power_sums(x));
        s1 += h;
        s2 += h * h;
        ++count;
    });
    const double m = s1 / static_cast<double>(count);
    const double enumerated = s2 / static_cast<double>(count) - m * m;
    // Population {0, 1}: sigma^2 = 1/4, mu4 = 1/16.
    const double closed = stats::h2_variance(1.0 / 16.0, 1.0 / 16.0, n);
    const double err = std::abs(enumerated - closed);
    return {"var_h2_enumeration", err <= 1e-12, "error " + sci(err)};
}

CheckResult check_cov_h2() {
    constexpr std::size_t n = 4;
    const std::vector<std::pair<double, double>> pop = {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {1, 1}};
    double sx = 0.0, sy = 0.0, sxy = 0.0;
    std::size_t count = 0;
    for_each_sequence(pop.size(), n, [&](const std::vector<std::size_t>& idx) {
        std::vector<double> x, y;
        for (auto i : idx) {
            x.push_back(pop[i].first);
            y.push_back(pop[i].second);
        }
        const double hx = stats::h2(stats::power_sums(x));
        const double hy = stats::h2(stats::power_sums(y));
        sx += hx;
        sy += hy;
        sxy += hx * hy;
        ++count;
    });
    const double cnt = static_cast<double>(count);
    const double enumerated = sxy / cnt - (sx / cnt) * (sy / cnt);
    double mx = 0.0, my = 0.0;
    for (const auto& [a, b] : pop) {
        mx += a;
        my += b;
    }
    mx /= static_cast<double>(pop.size());
    my /= static_cast<double>(pop.size());
    double m20 = 0.0, m02 = 0.0, m11 = 0.0, m22 = 0.0;
    for (const auto& [a, b] : pop) {
        const double dx = a - mx, dy = b - my;
        m20 += dx * dx;
        m02 += dy * dy;
        m11 += dx * dy;
        m22 += dx * dx * dy * dy;
    }
    const double np = static_cast<double>(pop.size());
    const double closed = stats::h2_covariance(m22 / np, (m20 / np) * (m02 / np), (m11 / np) * (m11 / np), n);
    const double err = std::abs(enumerated - closed);
    return {"cov_h2_enumeration", err <= 1e-12, "error " + sci(err)};
}

CheckResult check_kle(const config::ExperimentConfig& c, const fem::Mesh2D& mesh) {
    const std::size_t modes = std::min<std::size_t>(c.material.kle_modes, mesh.node_count());
    const auto basis = field::build_kle(c.kernel(), mesh, modes);
    const Eigen::MatrixXd& phi = basis.eigenvectors();
    const Eigen::MatrixXd gram = phi.transpose() * basis.mass().asDiagonal() * phi;
    const double err =
        (gram - Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(modes), static_cast<Eigen::Index>(modes)))
            .cwiseAbs()
            .maxCoeff();
    return {"kle_orthonormality", err <= 1e-8,
            std::to_string(modes) + " modes, captured " + sci(basis.captured_fraction()) + ", error " + sci(err)};
}

CheckResult guarded(const std::string& name, const std::function<CheckResult()>& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        return {name, false, e.what()};
    }
}

}  // namespace

std::vector<CheckResult> run_checks(const config::ExperimentConfig& c) {
    std::vector<CheckResult> out;
    fem::MeshHierarchy hierarchy;
    out.push_back(guarded("mesh_hierarchy", [&] {
        hierarchy = config::build_hierarchy(c);
        return CheckResult{"mesh_hierarchy", true,
                           std::to_string(hierarchy.level_count()) + " levels, " +
                               std::to_string(hierarchy.coarsest().node_count()) + " common nodes"};
    }));
    out.push_back(guarded("delta_C_round_trip", [&] { return check_round_trip(c); }));
    out.push_back(guarded("spd_sampling", [&] { return check_spd_sampling(c); }));
    out.push_back(guarded("patch_test", [&] { return check_patch(c); }));
    out.push_back(guarded("h2_unbiased_enumeration", [] { return check_h2_unbiased(); }));
    out.push_back(guarded("var_h2_enumeration", [] { return check_var_h2(); }));
    out.push_back(guarded("cov_h2_enumeration", [] { return check_cov_h2(); }));
    if (!hierarchy.meshes.empty()) {
        out.push_back(guarded("kle_orthonormality", [&] { return check_kle(c, hierarchy.coarsest()); }));
    }
    return out;
}

}  // namespace simlmc::validation

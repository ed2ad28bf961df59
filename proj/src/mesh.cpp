#include "simlmc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "simlmc/error.hpp"

namespace simlmc::fem {

namespace {

constexpr std::array<double, 4> kNodeXi = {-1.0, 1.0, 1.0, -1.0};
constexpr std::array<double, 4> kNodeEta = {-1.0, -1.0, 1.0, 1.0};

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

std::array<Point, 4> Mesh2D::element_coordinates(std::size_t e) const {
    const auto& el = elements[e];
    return {nodes[el[0]], nodes[el[1]], nodes[el[2]], nodes[el[3]]};
}

std::array<double, 4> shape_functions(double xi, double eta) {
    std::array<double, 4> n{};
    for (std::size_t a = 0; a < 4; ++a) {
        n[a] = 0.25 * (1.0 + kNodeXi[a] * xi) * (1.0 + kNodeEta[a] * eta);
    }
    return n;
}

std::array<std::array<double, 4>, 2> shape_derivatives(double xi, double eta) {
    std::array<std::array<double, 4>, 2> d{};
    for (std::size_t a = 0; a < 4; ++a) {
        d[0][a] = 0.25 * kNodeXi[a] * (1.0 + kNodeEta[a] * eta);
        d[1][a] = 0.25 * kNodeEta[a] * (1.0 + kNodeXi[a] * xi);
    }
    return d;
}

double jacobian_determinant(const std::array<Point, 4>& xy, double xi, double eta) {
    const auto d = shape_derivatives(xi, eta);
    double j00 = 0, j01 = 0, j10 = 0, j11 = 0;
    for (std::size_t a = 0; a < 4; ++a) {
        j00 += d[0][a] * xy[a].x;
        j01 += d[0][a] * xy[a].y;
        j10 += d[1][a] * xy[a].x;
        j11 += d[1][a] * xy[a].y;
    }
    return j00 * j11 - j01 * j10;
}

Point map_to_physical(const std::array<Point, 4>& xy, double xi, double eta) {
    const auto n = shape_functions(xi, eta);
    Point p;
    for (std::size_t a = 0; a < 4; ++a) {
        p.x += n[a] * xy[a].x;
        p.y += n[a] * xy[a].y;
    }
    return p;
}

std::vector<Point> gauss_points(const Mesh2D& mesh) {
    std::vector<Point> pts;
    pts.reserve(mesh.element_count() * kGaussPerElement);
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const auto xy = mesh.element_coordinates(e);
        for (const auto& g : kGaussPoints) pts.push_back(map_to_physical(xy, g[0], g[1]));
    }
    return pts;
}

double element_area(const Mesh2D& mesh, std::size_t e) {
    const auto xy = mesh.element_coordinates(e);
    double area = 0.0;
    for (const auto& g : kGaussPoints) area += jacobian_determinant(xy, g[0], g[1]);
    return area;
}

double mesh_size(const Mesh2D& mesh) {
    double h = 0.0;
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const auto xy = mesh.element_coordinates(e);
        for (std::size_t a = 0; a < 4; ++a) h = std::max(h, distance(xy[a], xy[(a + 1) % 4]));
    }
    return h;
}

void validate(const Mesh2D& mesh) {
    const std::size_t nn = mesh.node_count();
    if (nn == 0 || mesh.element_count() == 0) throw MeshError("mesh has no nodes or no elements");
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const auto& el = mesh.elements[e];
        for (std::size_t a = 0; a < 4; ++a) {
            if (el[a] >= nn) {
                throw MeshError("element " + std::to_string(e) + " references node " +
                                std::to_string(el[a]) + " beyond node count " + std::to_string(nn));
            }
            for (std::size_t b = 0; b < a; ++b) {
                if (el[a] == el[b]) {
                    throw MeshError("element " + std::to_string(e) + " repeats node " +
                                    std::to_string(el[a]));
                }
            }
        }
        const auto xy = mesh.element_coordinates(e);
        for (const auto& g : kGaussPoints) {
            if (!(jacobian_determinant(xy, g[0], g[1]) > 0.0)) {
                throw MeshError("element " + std::to_string(e) +
                                " has non-positive Jacobian (check counter-clockwise ordering)");
            }
        }
    }
    std::set<std::size_t> fixed;
    for (auto id : mesh.dirichlet_nodes) {
        if (id >= nn) throw MeshError("Dirichlet node " + std::to_string(id) + " out of range");
        fixed.insert(id);
    }
    for (const auto& r : mesh.rollers) {
        if (r.node >= nn) throw MeshError("roller node " + std::to_string(r.node) + " out of range");
    }
    for (std::size_t k = 0; k < mesh.neumann_edges.size(); ++k) {
        const auto& ne = mesh.neumann_edges[k];
        if (ne.element >= mesh.element_count()) {
            throw MeshError("Neumann entry " + std::to_string(k) + " references element " +
                            std::to_string(ne.element) + " out of range");
        }
        if (ne.edge < 0 || ne.edge > 3) {
            throw MeshError("Neumann entry " + std::to_string(k) + " has edge index " +
                            std::to_string(ne.edge) + " outside 0..3");
        }
        const auto& el = mesh.elements[ne.element];
        const std::size_t a = el[static_cast<std::size_t>(ne.edge)];
        const std::size_t b = el[static_cast<std::size_t>((ne.edge + 1) % 4)];
        if (fixed.count(a) || fixed.count(b)) {
            throw MeshError("Neumann edge " + std::to_string(k) + " touches a Dirichlet node");
        }
    }
}

std::vector<std::size_t> match_nodes(std::span<const Point> coarse, std::span<const Point> fine) {
    std::vector<std::pair<double, std::size_t>> by_x(fine.size());
    for (std::size_t i = 0; i < fine.size(); ++i) by_x[i] = {fine[i].x, i};
    std::sort(by_x.begin(), by_x.end());

    std::vector<std::size_t> map(coarse.size(), npos);
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        const Point p = coarse[i];
        auto it = std::lower_bound(by_x.begin(), by_x.end(),
                                   std::make_pair(p.x - kCoordinateMatchTolerance, std::size_t{0}));
        for (; it != by_x.end() && it->first <= p.x + kCoordinateMatchTolerance; ++it) {
            const Point q = fine[it->second];
            if (std::abs(q.y - p.y) <= kCoordinateMatchTolerance) {
                map[i] = it->second;
                break;
            }
        }
    }
    return map;
}

MeshHierarchy make_hierarchy(std::vector<Mesh2D> meshes) {
    if (meshes.empty()) throw NestingError("hierarchy has no levels");
    MeshHierarchy h;
    for (std::size_t l = 0; l < meshes.size(); ++l) {
        meshes[l].level = static_cast<int>(l);
        validate(meshes[l]);
    }
    h.common_nodes.resize(meshes.size());
    const auto& base = meshes.front().nodes;
    for (std::size_t l = 0; l < meshes.size(); ++l) {
        auto map = match_nodes(base, meshes[l].nodes);
        for (std::size_t i = 0; i < map.size(); ++i) {
            if (map[i] == npos) {
                throw NestingError("level-0 node " + std::to_string(i) + " at (" +
                                   std::to_string(base[i].x) + ", " + std::to_string(base[i].y) +
                                   ") has no counterpart on level " + std::to_string(l));
            }
        }
        h.common_nodes[l] = std::move(map);
        if (l > 0) {
            const double ratio = mesh_size(meshes[l - 1]) / mesh_size(meshes[l]);
            if (ratio < 1.5 || ratio > 2.5) {
                throw NestingError("mesh size ratio between levels " + std::to_string(l - 1) +
                                   " and " + std::to_string(l) + " is " + std::to_string(ratio) +
                                   ", expected about 2");
            }
        }
    }
    h.meshes = std::move(meshes);
    return h;
}

Mesh2D build_plate_mesh(double width, double height, int nx, int ny, int level) {
    if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height)) {
        throw GeometryError("plate dimensions must be positive and finite");
    }
    if (nx < 1 || ny < 1) throw GeometryError("plate needs at least one element per direction");

    Mesh2D m;
    m.level = level;
    const auto nxu = static_cast<std::size_t>(nx);
    const auto nyu = static_cast<std::size_t>(ny);
    m.nodes.reserve((nxu + 1) * (nyu + 1));
    // width * i / nx keeps coordinates bit-identical across refinements.
    for (std::size_t j = 0; j <= nyu; ++j) {
        for (std::size_t i = 0; i <= nxu; ++i) {
            m.nodes.push_back({width * static_cast<double>(i) / static_cast<double>(nxu),
                               height * static_cast<double>(j) / static_cast<double>(nyu)});
        }
    }
    auto id = [nxu](std::size_t i, std::size_t j) { return j * (nxu + 1) + i; };
    for (std::size_t j = 0; j < nyu; ++j) {
        for (std::size_t i = 0; i < nxu; ++i) {
            m.elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    for (std::size_t i = 0; i <= nxu; ++i) m.dirichlet_nodes.push_back(id(i, 0));
    const double traction = -1.0 / width;
    for (std::size_t i = 0; i < nxu; ++i) {
        m.neumann_edges.push_back({(nyu - 1) * nxu + i, 2, 0.0, traction});
    }
    return m;
}

MeshHierarchy build_plate_hierarchy(double width, double height, int nx0, int ny0, int levels) {
    if (levels < 0) throw GeometryError("number of levels must be non-negative");
    if (levels > 12) throw GeometryError("more than 12 refinement levels requested");
    std::vector<Mesh2D> meshes;
    for (int l = 0; l <= levels; ++l) {
        meshes.push_back(build_plate_mesh(width, height, nx0 << l, ny0 << l, l));
    }
    return make_hierarchy(std::move(meshes));
}

PointLocator::PointLocator(const Mesh2D& mesh) : nodes_(mesh.nodes), elements_(mesh.elements) {
    double xmax = -std::numeric_limits<double>::infinity();
    double ymax = xmax;
    xmin_ = ymin_ = std::numeric_limits<double>::infinity();
    for (const auto& p : nodes_) {
        xmin_ = std::min(xmin_, p.x);
        ymin_ = std::min(ymin_, p.y);
        xmax = std::max(xmax, p.x);
        ymax = std::max(ymax, p.y);
    }
    const double side = std::sqrt(static_cast<double>(std::max<std::size_t>(elements_.size(), 1)));
    nbx_ = nby_ = std::max<std::size_t>(1, static_cast<std::size_t>(side));
    cell_w_ = std::max((xmax - xmin_) / static_cast<double>(nbx_), 1e-300);
    cell_h_ = std::max((ymax - ymin_) / static_cast<double>(nby_), 1e-300);
    buckets_.resize(nbx_ * nby_);

    auto clamp_index = [](double v, std::size_t n) {
        if (!(v > 0.0)) return std::size_t{0};
        return std::min(static_cast<std::size_t>(v), n - 1);
    };
    for (std::size_t e = 0; e < elements_.size(); ++e) {
        double ex0 = std::numeric_limits<double>::infinity(), ey0 = ex0;
        double ex1 = -ex0, ey1 = -ex0;
        for (auto n : elements_[e]) {
            ex0 = std::min(ex0, nodes_[n].x);
            ex1 = std::max(ex1, nodes_[n].x);
            ey0 = std::min(ey0, nodes_[n].y);
            ey1 = std::max(ey1, nodes_[n].y);
        }
        const auto i0 = clamp_index((ex0 - xmin_) / cell_w_ - 1e-9, nbx_);
        const auto i1 = clamp_index((ex1 - xmin_) / cell_w_ + 1e-9, nbx_);
        const auto j0 = clamp_index((ey0 - ymin_) / cell_h_ - 1e-9, nby_);
        const auto j1 = clamp_index((ey1 - ymin_) / cell_h_ + 1e-9, nby_);
        for (auto j = j0; j <= j1; ++j)
            for (auto i = i0; i <= i1; ++i) buckets_[j * nbx_ + i].push_back(e);
    }
    nodes_by_x_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) nodes_by_x_[i] = {nodes_[i].x, i};
    std::sort(nodes_by_x_.begin(), nodes_by_x_.end());
}

bool PointLocator::try_element(std::size_t e, Point p, InterpolationStencil& out) const {
    const auto& el = elements_[e];
    const std::array<Point, 4> xy = {nodes_[el[0]], nodes_[el[1]], nodes_[el[2]], nodes_[el[3]]};
    double xi = 0.0, eta = 0.0;
    for (int it = 0; it < 30; ++it) {
        const Point q = map_to_physical(xy, xi, eta);
        const double rx = q.x - p.x, ry = q.y - p.y;
        const auto d = shape_derivatives(xi, eta);
        double j00 = 0, j01 = 0, j10 = 0, j11 = 0;
        for (std::size_t a = 0; a < 4; ++a) {
            j00 += d[0][a] * xy[a].x;
            j01 += d[1][a] * xy[a].x;
            j10 += d[0][a] * xy[a].y;
            j11 += d[1][a] * xy[a].y;
        }
        const double det = j00 * j11 - j01 * j10;
        if (det == 0.0) return false;
        const double dxi = (j11 * rx - j01 * ry) / det;
        const double deta = (-j10 * rx + j00 * ry) / det;
        xi -= dxi;
        eta -= deta;
        if (std::abs(dxi) + std::abs(deta) < 1e-15) break;
        if (std::abs(xi) > 10.0 || std::abs(eta) > 10.0) return false;
    }
    constexpr double slack = 1.0 + 1e-9;
    if (std::abs(xi) > slack || std::abs(eta) > slack) return false;
    xi = std::clamp(xi, -1.0, 1.0);
    eta = std::clamp(eta, -1.0, 1.0);
    out.nodes = el;
    out.weights = shape_functions(xi, eta);
    return true;
}

InterpolationStencil PointLocator::stencil(Point p) const {
    InterpolationStencil s;
    // Exact hit on a node: unit weight, no inverse mapping round-off.
    auto it = std::lower_bound(nodes_by_x_.begin(), nodes_by_x_.end(),
                               std::make_pair(p.x - kCoordinateMatchTolerance, std::size_t{0}));
    for (; it != nodes_by_x_.end() && it->first <= p.x + kCoordinateMatchTolerance; ++it) {
        if (std::abs(nodes_[it->second].y - p.y) <= kCoordinateMatchTolerance) {
            s.nodes = {it->second, it->second, it->second, it->second};
            s.weights = {1.0, 0.0, 0.0, 0.0};
            return s;
        }
    }
    const double fx = (p.x - xmin_) / cell_w_;
    const double fy = (p.y - ymin_) / cell_h_;
    if (fx > -1e-9 && fy > -1e-9 && fx < static_cast<double>(nbx_) + 1e-9 &&
        fy < static_cast<double>(nby_) + 1e-9) {
        const auto i = std::min(static_cast<std::size_t>(std::max(fx, 0.0)), nbx_ - 1);
        const auto j = std::min(static_cast<std::size_t>(std::max(fy, 0.0)), nby_ - 1);
        for (auto e : buckets_[j * nbx_ + i]) {
            if (try_element(e, p, s)) return s;
        }
    }
    throw ExtrapolationError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                             ") lies outside the reference mesh");
}

}  // namespace simlmc::fem

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace simlmc::fem {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

enum class Axis { x = 0, y = 1 };

// Traction on edge `edge` of `element`; edge e joins local nodes e and (e + 1) % 4.
// Components in N/cm (force per unit edge length).
struct NeumannEdge {
    std::size_t element = 0;
    int edge = 0;
    double tx = 0.0;
    double ty = 0.0;
};

// Single-component support (u_axis = 0). Not part of the mesh file format.
struct Roller {
    std::size_t node = 0;
    Axis axis = Axis::x;
};

using Element = std::array<std::size_t, 4>;

/// A 2D mesh of four-node quadrilaterals, nodes counter-clockwise per element.
/// Coordinates in cm. Dirichlet nodes are fully fixed (u = 0).
struct Mesh2D {
    int level = 0;
    std::vector<Point> nodes;
    std::vector<Element> elements;
    std::vector<std::size_t> dirichlet_nodes;
    std::vector<NeumannEdge> neumann_edges;
    std::vector<Roller> rollers;

    std::size_t node_count() const noexcept { return nodes.size(); }
    std::size_t element_count() const noexcept { return elements.size(); }
    std::size_t dof_count() const noexcept { return 2 * nodes.size(); }
    std::array<Point, 4> element_coordinates(std::size_t e) const;
};

// 2x2 Gauss rule on the reference square, in the order (-,-), (+,-), (+,+), (-,+).
inline constexpr double kGaussAbscissa = 0.57735026918962576451;
inline constexpr std::array<std::array<double, 2>, 4> kGaussPoints = {{
    {-kGaussAbscissa, -kGaussAbscissa},
    {kGaussAbscissa, -kGaussAbscissa},
    {kGaussAbscissa, kGaussAbscissa},
    {-kGaussAbscissa, kGaussAbscissa},
}};
inline constexpr std::size_t kGaussPerElement = 4;

// Bilinear shape functions and their reference derivatives at (xi, eta).
std::array<double, 4> shape_functions(double xi, double eta);
std::array<std::array<double, 4>, 2> shape_derivatives(double xi, double eta);

// Jacobian determinant of the isoparametric map at (xi, eta).
double jacobian_determinant(const std::array<Point, 4>& xy, double xi, double eta);

Point map_to_physical(const std::array<Point, 4>& xy, double xi, double eta);

// Physical coordinates of all Gauss points, element-major (4 per element).
std::vector<Point> gauss_points(const Mesh2D& mesh);

double element_area(const Mesh2D& mesh, std::size_t e);

// Largest element edge length; the mesh parameter h used for rate fits.
double mesh_size(const Mesh2D& mesh);

// Throws MeshError on: out-of-range or repeated node ids, non-positive Jacobian
// at a Gauss point, bad edge index, Dirichlet/Neumann overlap.
void validate(const Mesh2D& mesh);

struct MeshHierarchy {
    std::vector<Mesh2D> meshes;
    // common_nodes[l][i] = id on level l of the node coinciding with level-0 node i.
    std::vector<std::vector<std::size_t>> common_nodes;

    std::size_t level_count() const noexcept { return meshes.size(); }
    std::size_t max_level() const noexcept { return meshes.size() - 1; }
    const Mesh2D& coarsest() const { return meshes.front(); }
    const Mesh2D& finest() const { return meshes.back(); }
};

inline constexpr double kCoordinateMatchTolerance = 1e-10;

/// Validates every level and builds the level-0 common-node maps.
/// Throws NestingError when a coarse node has no coordinate match on a finer
/// level or when mesh sizes do not roughly halve per level.
MeshHierarchy make_hierarchy(std::vector<Mesh2D> meshes);

/// Structured plate [0, width] x [0, height]; level l has (nx0 * 2^l) x (ny0 * 2^l)
/// elements. Bottom nodes fixed; top edge loaded by a uniform downward traction
/// of total magnitude 1 N (scaled by the load resultant at solve time).
MeshHierarchy build_plate_hierarchy(double width, double height, int nx0, int ny0, int levels);

Mesh2D build_plate_mesh(double width, double height, int nx, int ny, int level = 0);

/// Nodes of a finer mesh matching `coarse` coordinates within kCoordinateMatchTolerance.
/// Entry i is the fine id, or npos when there is no match.
inline constexpr std::size_t npos = static_cast<std::size_t>(-1);
std::vector<std::size_t> match_nodes(std::span<const Point> coarse, std::span<const Point> fine);

struct InterpolationStencil {
    std::array<std::size_t, 4> nodes{};
    std::array<double, 4> weights{};
};

/// Locates points in a quad mesh and returns bilinear interpolation weights.
class PointLocator {
public:
    explicit PointLocator(const Mesh2D& mesh);

    // Throws ExtrapolationError when `p` lies outside every element.
    InterpolationStencil stencil(Point p) const;

private:
    bool try_element(std::size_t e, Point p, InterpolationStencil& out) const;

    std::vector<Point> nodes_;
    std::vector<Element> elements_;
    double xmin_ = 0.0, ymin_ = 0.0, cell_w_ = 1.0, cell_h_ = 1.0;
    std::size_t nbx_ = 1, nby_ = 1;
    std::vector<std::vector<std::size_t>> buckets_;
    std::vector<std::pair<double, std::size_t>> nodes_by_x_;
};

}  // namespace simlmc::fem

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string_view>
#include <vector>

namespace elastinv {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
double norm(Vec2 a);
double dot(Vec2 a, Vec2 b);

enum class Side { Top, Bottom, Left, Right };

Side parse_side(std::string_view name);
std::string_view side_name(Side side);

struct BoundaryEdge {
    std::array<int, 2> nodes;
    Side side;
};

using Triangle = std::array<int, 3>;

/// Immutable triangulation of the unit square.
///
/// Triangles are positively oriented. Boundary edges carry the side of the
/// square they lie on. Once constructed a Mesh is never modified, so it can be
/// shared freely between threads.
class Mesh {
public:
    Mesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles,
         std::vector<BoundaryEdge> boundary_edges);

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t triangle_count() const { return triangles_.size(); }

    const std::vector<Vec2>& nodes() const { return nodes_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<BoundaryEdge>& boundary_edges() const { return edges_; }

    const Vec2& node(std::size_t i) const { return nodes_.at(i); }
    const Triangle& triangle(std::size_t t) const { return triangles_.at(t); }

    double area(std::size_t t) const { return areas_.at(t); }
    /// Lumped nodal area: one third of the area of every incident triangle.
    const std::vector<double>& nodal_areas() const { return nodal_areas_; }
    /// Triangles incident to each node, in increasing index order.
    const std::vector<std::vector<int>>& node_triangles() const { return node_tris_; }

    /// Shortest edge length over the whole mesh.
    double min_edge_length() const { return min_edge_; }
    /// Largest triangle diameter (longest edge).
    double max_cell_diameter() const { return max_diam_; }

    /// Barycentric gradients of the three hat functions on triangle t.
    const std::array<Vec2, 3>& shape_gradients(std::size_t t) const { return grads_.at(t); }

private:
    std::vector<Vec2> nodes_;
    std::vector<Triangle> triangles_;
    std::vector<BoundaryEdge> edges_;
    std::vector<double> areas_;
    std::vector<double> nodal_areas_;
    std::vector<std::array<Vec2, 3>> grads_;
    std::vector<std::vector<int>> node_tris_;
    double min_edge_ = 0.0;
    double max_diam_ = 0.0;
};

struct ScalarField {
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(std::size_t n, double fill = 0.0) : values(n, fill) {}
    explicit ScalarField(std::vector<double> v) : values(std::move(v)) {}

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

/// Nodal displacement-like field. Storage is node-major with the two
/// components interleaved, which is also the unknown ordering of the FEM
/// operators.
struct VectorField {
    std::vector<double> values;

    VectorField() = default;
    explicit VectorField(std::size_t nodes) : values(2 * nodes, 0.0) {}
    explicit VectorField(std::vector<double> v) : values(std::move(v)) {}

    std::size_t node_count() const { return values.size() / 2; }
    double& x(std::size_t i) { return values[2 * i]; }
    double& y(std::size_t i) { return values[2 * i + 1]; }
    double x(std::size_t i) const { return values[2 * i]; }
    double y(std::size_t i) const { return values[2 * i + 1]; }
};

/// Structured triangulation of (0,1)^2 with n_divisions cells per side.
/// Nodes are row-major by (y, then x). Cell diagonals alternate with the cell
/// parity so the mesh is mirror-symmetric about x = 0.5 and y = 0.5 for even
/// n_divisions.
Mesh generate_mesh(int n_divisions);

/// Reads the plain-text mesh format:
///   nodes N triangles T
///   N lines "x y", T lines "i j k" (0-based), then boundary lines "i j TAG".
Mesh load_mesh(const std::filesystem::path& path);

template <typename Fn>
ScalarField sample_field(const Mesh& mesh, Fn&& fn) {
    ScalarField out(mesh.node_count());
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        out[i] = fn(mesh.nodes()[i].x, mesh.nodes()[i].y);
    }
    return out;
}

Vec2 element_gradient(const Mesh& mesh, const ScalarField& field, std::size_t triangle_index);

/// Area-weighted average over incident triangles of |element gradient|.
ScalarField nodal_gradient_magnitude(const Mesh& mesh, const ScalarField& field);

/// Nodes on one side of the square, sorted along that side.
std::vector<int> boundary_nodes(const Mesh& mesh, Side side);

void check_size(const Mesh& mesh, const ScalarField& field, std::string_view what);
void check_size(const Mesh& mesh, const VectorField& field, std::string_view what);

}  // namespace elastinv

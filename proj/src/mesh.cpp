#include "elastinv/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace elastinv {

double norm(Vec2 a) { return std::hypot(a.x, a.y); }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

Side parse_side(std::string_view name) {
    if (name == "Top" || name == "top") return Side::Top;
    if (name == "Bottom" || name == "bottom") return Side::Bottom;
    if (name == "Left" || name == "left") return Side::Left;
    if (name == "Right" || name == "right") return Side::Right;
    throw std::invalid_argument("unknown boundary tag: " + std::string(name));
}

std::string_view side_name(Side side) {
    switch (side) {
        case Side::Top: return "Top";
        case Side::Bottom: return "Bottom";
        case Side::Left: return "Left";
        case Side::Right: return "Right";
    }
    return "?";
}

namespace {

double signed_area(Vec2 a, Vec2 b, Vec2 c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

}  // namespace

Mesh::Mesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles,
           std::vector<BoundaryEdge> boundary_edges)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)), edges_(std::move(boundary_edges)) {
    const auto n = static_cast<int>(nodes_.size());
    areas_.reserve(triangles_.size());
    grads_.reserve(triangles_.size());
    nodal_areas_.assign(nodes_.size(), 0.0);
    node_tris_.assign(nodes_.size(), {});
    min_edge_ = std::numeric_limits<double>::infinity();

    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        const auto& tri = triangles_[t];
        for (int v : tri) {
            if (v < 0 || v >= n) throw std::invalid_argument("triangle references a missing node");
        }
        const Vec2 a = nodes_[tri[0]], b = nodes_[tri[1]], c = nodes_[tri[2]];
        const double area = signed_area(a, b, c);
        if (!(area > 0.0)) {
            throw std::invalid_argument("triangle " + std::to_string(t) + " has non-positive area");
        }
        areas_.push_back(area);
        // grad(lambda_i) = rot90(opposite edge) / (2 area)
        const double s = 1.0 / (2.0 * area);
        grads_.push_back({Vec2{(b.y - c.y) * s, (c.x - b.x) * s},
                          Vec2{(c.y - a.y) * s, (a.x - c.x) * s},
                          Vec2{(a.y - b.y) * s, (b.x - a.x) * s}});
        for (int k = 0; k < 3; ++k) {
            nodal_areas_[tri[k]] += area / 3.0;
            node_tris_[tri[k]].push_back(static_cast<int>(t));
            const double len = norm(nodes_[tri[(k + 1) % 3]] - nodes_[tri[k]]);
            min_edge_ = std::min(min_edge_, len);
            max_diam_ = std::max(max_diam_, len);
        }
    }
    for (const auto& e : edges_) {
        for (int v : e.nodes) {
            if (v < 0 || v >= n) throw std::invalid_argument("boundary edge references a missing node");
        }
    }
}

Mesh generate_mesh(int n_divisions) {
    if (n_divisions < 2) throw std::invalid_argument("n_divisions must be >= 2");
    const int n = n_divisions;
    const int row = n + 1;
    std::vector<Vec2> nodes;
    nodes.reserve(static_cast<std::size_t>(row) * row);
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            nodes.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
        }
    }
    auto id = [row](int i, int j) { return j * row + i; };

    std::vector<Triangle> tris;
    tris.reserve(2 * static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int p00 = id(i, j), p10 = id(i + 1, j), p01 = id(i, j + 1), p11 = id(i + 1, j + 1);
            if ((i + j) % 2 == 0) {
                // diagonal p00-p11
                tris.push_back({p00, p10, p11});
                tris.push_back({p00, p11, p01});
            } else {
                // diagonal p10-p01
                tris.push_back({p00, p10, p01});
                tris.push_back({p10, p11, p01});
            }
        }
    }

    std::vector<BoundaryEdge> edges;
    edges.reserve(4 * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        edges.push_back({{id(i, 0), id(i + 1, 0)}, Side::Bottom});
        edges.push_back({{id(i + 1, n), id(i, n)}, Side::Top});
    }
    for (int j = 0; j < n; ++j) {
        edges.push_back({{id(n, j), id(n, j + 1)}, Side::Right});
        edges.push_back({{id(0, j + 1), id(0, j)}, Side::Left});
    }
    return Mesh(std::move(nodes), std::move(tris), std::move(edges));
}

Mesh load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mesh file " + path.string());
    std::string kw_nodes, kw_tris;
    std::size_t n_nodes = 0, n_tris = 0;
    if (!(in >> kw_nodes >> n_nodes >> kw_tris >> n_tris) || kw_nodes != "nodes" || kw_tris != "triangles") {
        throw std::runtime_error("mesh file: expected header 'nodes N triangles T'");
    }
    std::vector<Vec2> nodes(n_nodes);
    for (auto& p : nodes) {
        if (!(in >> p.x >> p.y)) throw std::runtime_error("mesh file: truncated node list");
    }
    std::vector<Triangle> tris(n_tris);
    for (auto& t : tris) {
        if (!(in >> t[0] >> t[1] >> t[2])) throw std::runtime_error("mesh file: truncated triangle list");
        // accept either orientation on input
        if (t[0] >= 0 && t[1] >= 0 && t[2] >= 0 && static_cast<std::size_t>(std::max({t[0], t[1], t[2]})) < n_nodes &&
            signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]) < 0.0) {
            std::swap(t[1], t[2]);
        }
    }
    std::vector<BoundaryEdge> edges;
    int a = 0, b = 0;
    std::string tag;
    while (in >> a >> b >> tag) edges.push_back({{a, b}, parse_side(tag)});
    return Mesh(std::move(nodes), std::move(tris), std::move(edges));
}

Vec2 element_gradient(const Mesh& mesh, const ScalarField& field, std::size_t triangle_index) {
    const auto& tri = mesh.triangle(triangle_index);
    const auto& g = mesh.shape_gradients(triangle_index);
    Vec2 out;
    for (int k = 0; k < 3; ++k) out = out + field[tri[k]] * g[k];
    return out;
}

ScalarField nodal_gradient_magnitude(const Mesh& mesh, const ScalarField& field) {
    check_size(mesh, field, "nodal_gradient_magnitude");
    std::vector<double> per_tri(mesh.triangle_count());
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        per_tri[t] = norm(element_gradient(mesh, field, t));
    }
    ScalarField out(mesh.node_count());
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        double num = 0.0, den = 0.0;
        for (int t : mesh.node_triangles()[i]) {
            num += mesh.area(t) * per_tri[t];
            den += mesh.area(t);
        }
        out[i] = den > 0.0 ? num / den : 0.0;
    }
    return out;
}

std::vector<int> boundary_nodes(const Mesh& mesh, Side side) {
    std::vector<int> ids;
    for (const auto& e : mesh.boundary_edges()) {
        if (e.side == side) ids.insert(ids.end(), e.nodes.begin(), e.nodes.end());
    }
    const bool along_x = side == Side::Top || side == Side::Bottom;
    auto key = [&](int i) { return along_x ? mesh.node(i).x : mesh.node(i).y; };
    std::sort(ids.begin(), ids.end(), [&](int a, int b) { return key(a) < key(b) || (key(a) == key(b) && a < b); });
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

void check_size(const Mesh& mesh, const ScalarField& field, std::string_view what) {
    if (field.size() != mesh.node_count()) {
        throw std::invalid_argument(std::string(what) + ": scalar field length does not match node count");
    }
}

void check_size(const Mesh& mesh, const VectorField& field, std::string_view what) {
    if (field.values.size() != 2 * mesh.node_count()) {
        throw std::invalid_argument(std::string(what) + ": vector field length does not match node count");
    }
}

}  // namespace elastinv

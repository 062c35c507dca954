#include "elastinv/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "elastinv/parallel.hpp"

namespace elastinv {

double Contour::length() const {
    double total = 0.0;
    for (const auto& s : segments) total += norm(s.b - s.a);
    return total;
}

LevelSet signed_distance_circle(const Mesh& mesh, Vec2 center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("circle radius must be positive");
    return {sample_field(mesh, [&](double x, double y) { return norm(Vec2{x, y} - center) - radius; })};
}

LevelSet level_set_from_circles(const Mesh& mesh, const std::vector<Circle>& circles) {
    if (circles.empty()) throw std::invalid_argument("geometry needs at least one circle");
    ScalarField theta(mesh.node_count(), std::numeric_limits<double>::infinity());
    for (const auto& c : circles) {
        const auto d = signed_distance_circle(mesh, c.center, c.radius).theta;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            theta[i] = c.subtract ? std::max(theta[i], -d[i]) : std::min(theta[i], d[i]);
        }
    }
    return {std::move(theta)};
}

namespace {

bool negative(double v) { return v < 0.0; }

Vec2 crossing(Vec2 pa, Vec2 pb, double ta, double tb) {
    const double s = ta / (ta - tb);
    return pa + s * (pb - pa);
}

double point_segment_distance(Vec2 p, const Segment& s) {
    const Vec2 d = s.b - s.a;
    const double len2 = dot(d, d);
    double t = len2 > 0.0 ? dot(p - s.a, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return norm(p - (s.a + t * d));
}

}  // namespace

Contour extract_zero_contour(const Mesh& mesh, const LevelSet& ls) {
    check_size(mesh, ls.theta, "extract_zero_contour");
    Contour out;
    for (const auto& tri : mesh.triangles()) {
        Vec2 pts[3];
        int found = 0;
        for (int k = 0; k < 3; ++k) {
            const int a = tri[k], b = tri[(k + 1) % 3];
            const double ta = ls.theta[a], tb = ls.theta[b];
            if (negative(ta) != negative(tb)) pts[found++] = crossing(mesh.node(a), mesh.node(b), ta, tb);
        }
        if (found == 2 && norm(pts[1] - pts[0]) > 0.0) out.segments.push_back({pts[0], pts[1]});
    }
    return out;
}

ReinitResult reinitialize(const Mesh& mesh, const LevelSet& ls) {
    const Contour contour = extract_zero_contour(mesh, ls);
    if (contour.empty()) return {ls, true};
    ScalarField out(mesh.node_count());
    parallel_for(mesh.node_count(), [&](std::size_t i) {
        const double t = ls.theta[i];
        if (t == 0.0) {
            out[i] = 0.0;
            return;
        }
        double best = std::numeric_limits<double>::infinity();
        for (const auto& s : contour.segments) best = std::min(best, point_segment_distance(mesh.node(i), s));
        out[i] = negative(t) ? -best : best;
    });
    return {{std::move(out)}, false};
}

LevelSet evolve(const Mesh& mesh, const LevelSet& ls, const ScalarField& speed, double tau_star, double cfl) {
    check_size(mesh, ls.theta, "evolve");
    check_size(mesh, speed, "evolve speed");
    if (!(tau_star > 0.0)) throw std::invalid_argument("tau_star must be positive");
    if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("cfl must be in (0, 1]");

    double max_speed = 0.0;
    for (double g : speed.values) max_speed = std::max(max_speed, std::abs(g));
    if (max_speed == 0.0) return ls;

    const double dtau_max = cfl * mesh.min_edge_length() / max_speed;
    LevelSet cur = ls;
    double remaining = tau_star;
    while (remaining > 0.0) {
        const double dtau = std::min(remaining, dtau_max);
        const ScalarField grad = nodal_gradient_magnitude(mesh, cur.theta);
        for (std::size_t i = 0; i < cur.theta.size(); ++i) cur.theta[i] -= dtau * grad[i] * speed[i];
        remaining -= dtau;
        if (remaining < 1e-14 * tau_star) break;
    }
    return cur;
}

namespace {

// Clip a triangle to {theta < 0} and accumulate area and first moments.
void clip_negative(Vec2 p[3], const double t[3], double& area, Vec2& moment) {
    Vec2 poly[4];
    int n = 0;
    for (int k = 0; k < 3; ++k) {
        const int j = (k + 1) % 3;
        if (negative(t[k])) poly[n++] = p[k];
        if (negative(t[k]) != negative(t[j])) poly[n++] = crossing(p[k], p[j], t[k], t[j]);
    }
    for (int k = 1; k + 1 < n; ++k) {
        const Vec2 a = poly[0], b = poly[k], c = poly[k + 1];
        const double ar = 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
        area += ar;
        moment = moment + (ar / 3.0) * (a + b + c);
    }
}

}  // namespace

PhaseGeometry inclusion_geometry(const Mesh& mesh, const LevelSet& ls) {
    check_size(mesh, ls.theta, "inclusion_geometry");
    double area = 0.0;
    Vec2 moment;
    for (const auto& tri : mesh.triangles()) {
        Vec2 p[3] = {mesh.node(tri[0]), mesh.node(tri[1]), mesh.node(tri[2])};
        const double t[3] = {ls.theta[tri[0]], ls.theta[tri[1]], ls.theta[tri[2]]};
        clip_negative(p, t, area, moment);
    }
    PhaseGeometry g;
    g.area = area;
    if (area > 0.0) g.centroid = (1.0 / area) * moment;
    return g;
}

int inclusion_components(const Mesh& mesh, const LevelSet& ls) {
    check_size(mesh, ls.theta, "inclusion_components");
    std::vector<int> parent(mesh.node_count());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (const auto& tri : mesh.triangles()) {
        for (int k = 0; k < 3; ++k) {
            const int a = tri[k], b = tri[(k + 1) % 3];
            if (negative(ls.theta[a]) && negative(ls.theta[b])) parent[find(a)] = find(b);
        }
    }
    int count = 0;
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        if (negative(ls.theta[i]) && find(static_cast<int>(i)) == static_cast<int>(i)) ++count;
    }
    return count;
}

}  // namespace elastinv

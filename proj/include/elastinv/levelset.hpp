#pragma once

#include <utility>
#include <vector>

#include "elastinv/mesh.hpp"

namespace elastinv {

/// Signed-distance level set. Convention: theta < 0 in the inclusion phase,
/// theta >= 0 in the surrounding phase.
struct LevelSet {
    ScalarField theta;
};

struct Segment {
    Vec2 a;
    Vec2 b;
};

/// Piecewise-linear zero contour, one segment per cut triangle.
struct Contour {
    std::vector<Segment> segments;

    bool empty() const { return segments.empty(); }
    double length() const;
};

struct Circle {
    Vec2 center;
    double radius = 0.0;
    /// Adding a circle grows the theta < 0 region; subtracting carves a hole.
    bool subtract = false;
};

LevelSet signed_distance_circle(const Mesh& mesh, Vec2 center, double radius);

/// Union/difference of circles applied in order (min for add, max for subtract).
LevelSet level_set_from_circles(const Mesh& mesh, const std::vector<Circle>& circles);

Contour extract_zero_contour(const Mesh& mesh, const LevelSet& ls);

struct ReinitResult {
    LevelSet ls;
    /// Set when the contour was empty and the input was returned as is.
    bool empty_contour = false;
};

/// Rebuilds theta as the signed exact distance to its zero contour.
ReinitResult reinitialize(const Mesh& mesh, const LevelSet& ls);

/// Explicit sub-stepped descent theta_tau = -|grad theta| * speed for
/// pseudo-time tau_star. Sub-steps are limited by cfl * h_mesh / max|speed|.
LevelSet evolve(const Mesh& mesh, const LevelSet& ls, const ScalarField& speed, double tau_star,
                double cfl = 0.5);

/// Area and centroid of {theta < 0} for the piecewise-linear interpolant.
struct PhaseGeometry {
    double area = 0.0;
    Vec2 centroid;
};
PhaseGeometry inclusion_geometry(const Mesh& mesh, const LevelSet& ls);

/// Connected components of the nodes with theta < 0 (mesh-edge adjacency).
int inclusion_components(const Mesh& mesh, const LevelSet& ls);

}  // namespace elastinv

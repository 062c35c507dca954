#pragma once

#include <string>
#include <vector>

#include "elastinv/levelset.hpp"
#include "elastinv/material.hpp"
#include "elastinv/mesh.hpp"
#include "elastinv/wave.hpp"

namespace elastinv {

enum class LineSearch { fixed_tau, backtracking };

/// Sign of the inertia term in the level-set speed. `descent` is the exact
/// cost gradient; `literal` flips the -rho' u_t . v_t term to +rho' u_t . v_t.
enum class InertiaSign { descent, literal };

struct InverseConfig {
    double eps_tilde = 1e-3;
    /// Level-set pseudo-time per outer iteration. With a normalized gradient
    /// this is the largest interface displacement per iteration.
    double tau_star = 0.02;
    int max_outer_iters = 40;
    LineSearch line_search = LineSearch::backtracking;
    int max_halvings = 8;
    int reinit_every = 1;
    double convergence_tol = 1e-4;
    double cfl = 0.5;
    /// Use g / max|g| as the descent speed.
    bool normalize_gradient = true;
    AdjointMode adjoint_mode = AdjointMode::reversed_time;
    /// Width of the immersed-boundary profile (immersed_forward adjoint only).
    double immersed_eps = 1.0 / 25.0;
    InertiaSign inertia_sign = InertiaSign::descent;

    void validate() const;
};

/// (1/eps_tilde) times the trapezoid-in-time, trapezoid-along-gamma squared
/// misfit of the second displacement component.
double cost(const BoundaryRecord& sim, const BoundaryRecord& delta, double eps_tilde);

/// Cost-functional gradient from a forward/adjoint pair:
///   g = int_0^T -rho'(theta) u_t . v_t + lambda' div u div v + 2 mu' eps(u):eps(v) dt
/// Element integrals use centroid coefficients and the P1 mass pattern; the
/// nodal sensitivity is divided by the lumped nodal area, so the lumped L2
/// inner product <g, d> is the directional derivative of the discrete cost.
ScalarField gradient(const Mesh& mesh, const LevelSet& ls, const MaterialModel& model, const TimeSeries& forward,
                     const TimeSeries& adjoint, InertiaSign inertia_sign = InertiaSign::descent);

/// Lumped-mass L2 inner product over the mesh.
double inner_product(const Mesh& mesh, const ScalarField& a, const ScalarField& b);

BoundaryRecord synthesize_data(const Mesh& mesh, const LevelSet& target, const MaterialModel& model,
                               const ForceParams& force, const SimConfig& cfg);

struct GradientCheck {
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
};

struct IterationRecord {
    int iter = 0;
    double cost = 0.0;
    ScalarField theta;
    Vec2 centroid;
    double area = 0.0;
    int components = 0;
    /// Pseudo-time of the step that produced this iterate (0 for the start).
    double tau_accepted = 0.0;
};

struct InversionResult {
    std::vector<IterationRecord> history;
    bool stalled = false;
    bool converged = false;
    std::string stop_reason;
};

/// Fixed inversion setting: mesh, material model, force, time stepping and
/// the measured boundary data. Holds a reference to the mesh.
class InverseProblem {
public:
    InverseProblem(const Mesh& mesh, MaterialModel model, ForceParams force, SimConfig sim, BoundaryRecord delta,
                   InverseConfig cfg);

    const Mesh& mesh() const { return *mesh_; }
    const MaterialModel& model() const { return model_; }
    const InverseConfig& config() const { return cfg_; }
    const BoundaryRecord& delta() const { return delta_; }

    struct Evaluation {
        double cost = 0.0;
        ForwardRun forward;
    };
    Evaluation evaluate(const LevelSet& ls) const;
    double cost_at(const LevelSet& ls) const { return evaluate(ls).cost; }

    struct GradientResult {
        double cost = 0.0;
        ScalarField g;
        TimeSeries forward;
        TimeSeries adjoint;
    };
    GradientResult gradient(const LevelSet& ls) const;

    /// Descent speed used for level-set motion: g, or g / max|g| when
    /// normalize_gradient is set. All zeros when g vanishes.
    ScalarField descent_speed(const ScalarField& g) const;

    /// Cost at theta - tau * speed for each tau, without reinitialization.
    std::vector<std::pair<double, double>> cost_profile(const LevelSet& ls, const ScalarField& speed,
                                                        const std::vector<double>& taus) const;

    /// Central difference of the cost along `direction` against <g, direction>.
    GradientCheck fd_gradient_check(const LevelSet& ls, const ScalarField& direction, double s) const;

    /// Level-set gradient flow from the initial layout.
    InversionResult invert(const LevelSet& initial) const;

    /// Cost of the all-zero simulation, the scale for "near zero" costs.
    double data_scale() const;

private:
    const Mesh* mesh_;
    MaterialModel model_;
    ForceParams force_;
    SimConfig sim_;
    BoundaryRecord delta_;
    InverseConfig cfg_;
    std::vector<double> load_profile_;
};

/// Smooth random direction: a few seeded low-frequency sinusoids over the unit square.
ScalarField smooth_random_direction(const Mesh& mesh, unsigned seed);

}  // namespace elastinv

#pragma once

#include <array>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "elastinv/fem.hpp"
#include "elastinv/levelset.hpp"
#include "elastinv/material.hpp"
#include "elastinv/mesh.hpp"

namespace elastinv {

enum class DirectionMode {
    full_angle,        ///< two-argument angle, radial field
    principal_arctan,  ///< single-argument arctan, folds into (-pi/2, pi/2)
};

/// Localized oscillating outer force
///   f(x, t) = A cos(2 pi t l_N / T) exp(-l_width r) (cos psi, sin psi)
/// with r and psi measured from the focus (l_x, l_y).
struct ForceParams {
    double amplitude = 1e10;
    double oscillations = 4.0;
    double focus_x = 0.5;
    double focus_y = 0.98;
    double width = 1300.0;
    double period = 4e-4;
    DirectionMode direction = DirectionMode::full_angle;

    void validate() const;
};

enum class BoundaryCondition { neumann_zero, dirichlet_zero };

struct SimConfig {
    double h = 3e-6;
    int n_steps = 100;
    /// Indexed by Side (Top, Bottom, Left, Right).
    std::array<BoundaryCondition, 4> bc{BoundaryCondition::neumann_zero, BoundaryCondition::neumann_zero,
                                        BoundaryCondition::neumann_zero, BoundaryCondition::neumann_zero};
    /// Empty means zero.
    VectorField u0;
    VectorField v0;
    double solver_tol = 1e-10;
    int max_iter = 5000;
    QuadratureRule quadrature = QuadratureRule::centroid;
    /// Keep every k-th displacement frame. Gradients need 1.
    int frame_stride = 1;

    void validate() const;
};

class SolverError : public std::runtime_error {
public:
    SolverError(int step, const LinearSolveReport& report);
    int step() const { return step_; }

private:
    int step_;
};

enum class TimeDirection { forward, backward };

/// Displacement frames u_0..u_N on a fixed mesh.
///
/// `outside` holds the frame just past the stored range: u_{-1} for a forward
/// march, v_{N+1} for a backward (adjoint) march.
struct TimeSeries {
    std::vector<VectorField> frames;
    VectorField outside;
    double h = 0.0;
    TimeDirection direction = TimeDirection::forward;
    int stride = 1;
};

/// Second displacement component sampled on boundary nodes, one row per step.
struct BoundaryRecord {
    std::vector<int> gamma_nodes;
    std::vector<double> gamma_x;
    std::size_t n_frames = 0;
    std::vector<double> values;  ///< row-major [n_frames x |gamma|]
    double h = 0.0;

    std::size_t width() const { return gamma_nodes.size(); }
    double at(std::size_t n, std::size_t j) const { return values[n * width() + j]; }
    double& at(std::size_t n, std::size_t j) { return values[n * width() + j]; }
    std::span<const double> row(std::size_t n) const { return {values.data() + n * width(), width()}; }
    /// Trapezoid weights of the gamma nodes along the boundary.
    std::vector<double> node_weights() const;
};

/// Throws std::invalid_argument unless both records share nodes, frames and h.
void check_compatible(const BoundaryRecord& a, const BoundaryRecord& b);
BoundaryRecord operator-(const BoundaryRecord& a, const BoundaryRecord& b);

double force_time_factor(const ForceParams& p, double t);
/// Unit direction of the force at x; (0, -1) at the focus.
Vec2 force_direction(const ForceParams& p, Vec2 x);
/// Nodal samples of f(., t).
VectorField laser_force(const ForceParams& p, double t, const Mesh& mesh);
/// P1 load vector of A exp(-l_width r)(cos psi, sin psi), integrated with
/// adaptive subdivision around the focus. Multiply by force_time_factor to
/// get F_n.
std::vector<double> laser_load_profile(const ForceParams& p, const Mesh& mesh);
/// Consistent P1 load vector of a nodal field: M0 f.
std::vector<double> load_vector(const Mesh& mesh, const VectorField& f);

VectorField initial_back_step(const VectorField& u0, const VectorField& v0, double h);

/// Solves (M + h^2 K) u = h^2 F_n + M (2 u_n - u_{n-1}). `load` is the
/// integrated load vector F_n (empty means zero).
VectorField implicit_step(const SparseOperator& mass, const SparseOperator& stiffness, const VectorField& u_n,
                          const VectorField& u_nm1, std::span<const double> load, double h, double tol = 1e-10,
                          int max_iter = 5000);

/// Assembled operators for one material layout, reused across forward and
/// adjoint marches. Holds a reference to the mesh.
class WaveSystem {
public:
    WaveSystem(const Mesh& mesh, const ScalarField& rho, const ScalarField& lambda, const ScalarField& mu,
               const SimConfig& cfg);
    static WaveSystem from_level_set(const Mesh& mesh, const LevelSet& ls, const MaterialModel& model,
                                     const SimConfig& cfg);

    const Mesh& mesh() const { return *mesh_; }
    const SimConfig& config() const { return cfg_; }
    const SparseOperator& mass() const { return mass_; }
    const SparseOperator& stiffness() const { return stiffness_; }
    const std::vector<int>& constrained_dofs() const { return fixed_; }

    /// Writes F_n (length 2N) for step n; leaving it untouched means zero load.
    using LoadFn = std::function<void(int step, std::span<double> load)>;

    /// u_{n+1} from u_n, u_{n-1} with load F_n, n = 0..N-1.
    TimeSeries march_forward(const LoadFn& load, const VectorField& u0, const VectorField& v0) const;
    /// v_m from v_{m+1}, v_{m+2} with load F_m, m = N..1, zero terminal data.
    /// Frame 0 is left at zero.
    TimeSeries march_backward(const LoadFn& load) const;

private:
    VectorField solve_step(int step, std::span<const double> rhs, const VectorField& guess) const;

    const Mesh* mesh_;
    SimConfig cfg_;
    SparseOperator mass_;
    SparseOperator stiffness_;
    SparseOperator system_;
    std::vector<int> fixed_;
};

BoundaryRecord record_boundary(const Mesh& mesh, const TimeSeries& ts, Side side = Side::Top);

struct ForwardRun {
    TimeSeries series;
    BoundaryRecord record;
};

ForwardRun run_forward(const Mesh& mesh, const LevelSet& ls, const MaterialModel& model,
                       const ForceParams& force, const SimConfig& cfg);
ForwardRun run_forward(const WaveSystem& system, const std::vector<double>& load_profile,
                       const ForceParams& force);

/// Per-frame velocities in physical time: backward differences for a forward
/// series (frame 0 gives v0), forward differences for a backward series.
std::vector<VectorField> velocity_series(const TimeSeries& ts);

/// div u / |grad u|_F per triangle; 0 where |grad u|_F is below 1e-14 of its max.
std::vector<double> element_dilation(const Mesh& mesh, const VectorField& u);
/// Area-weighted nodal average of element_dilation.
ScalarField dilation(const Mesh& mesh, const VectorField& u);

/// sech^2((y - l_y) / eps) / (2 eps), a regularized delta in y.
double immersed_profile(double y, double l_y, double eps);

/// Immersed Dirichlet forcing
///   f2 = (2 / eps_tilde) (u2 - delta) sech^2((y - l_y) / eps) / (2 eps), f1 = 0,
/// with delta extended off gamma by the nearest gamma node in x.
VectorField immersed_dirichlet_force(const Mesh& mesh, const VectorField& u, const std::vector<int>& gamma_nodes,
                                     std::span<const double> delta_frame, double l_y, double eps,
                                     double eps_tilde);

enum class AdjointMode {
    reversed_time,  ///< exact discrete adjoint, backward in time
    immersed_forward,  ///< forward in time with the immersed boundary force
};

struct AdjointParams {
    AdjointMode mode = AdjointMode::reversed_time;
    double eps_tilde = 1e-3;
    double immersed_eps = 1.0 / 25.0;
    double immersed_center_y = 0.98;
};

/// Adjoint field driven by the boundary residual u2 - delta. The forward
/// series is needed for immersed_forward mode, which uses u2 at every node.
TimeSeries run_adjoint(const WaveSystem& system, const BoundaryRecord& residual, const AdjointParams& params,
                       const TimeSeries* forward = nullptr);

}  // namespace elastinv

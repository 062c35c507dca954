#include "elastinv/wave.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace elastinv {

void ForceParams::validate() const {
    if (!std::isfinite(amplitude)) throw std::invalid_argument("force amplitude must be finite");
    if (!(width >= 0.0)) throw std::invalid_argument("force l_width must be non-negative");
    if (!(period > 0.0)) throw std::invalid_argument("force period T must be positive");
}

void SimConfig::validate() const {
    if (!(h > 0.0)) throw std::invalid_argument("time step h must be positive");
    if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
    if (!(solver_tol > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
    if (frame_stride < 1) throw std::invalid_argument("frame_stride must be >= 1");
}

SolverError::SolverError(int step, const LinearSolveReport& report)
    : std::runtime_error("linear solve failed at step " + std::to_string(step) + " (residual " +
                         std::to_string(report.residual) + " after " + std::to_string(report.iterations) +
                         " iterations)"),
      step_(step) {}

std::vector<double> BoundaryRecord::node_weights() const {
    const std::size_t m = width();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gamma_x[a] < gamma_x[b]; });
    std::vector<double> w(m, 0.0);
    for (std::size_t k = 0; k + 1 < m; ++k) {
        const double len = gamma_x[order[k + 1]] - gamma_x[order[k]];
        w[order[k]] += 0.5 * len;
        w[order[k + 1]] += 0.5 * len;
    }
    return w;
}

void check_compatible(const BoundaryRecord& a, const BoundaryRecord& b) {
    if (a.gamma_nodes != b.gamma_nodes || a.n_frames != b.n_frames || a.values.size() != b.values.size()) {
        throw std::invalid_argument("boundary records differ in shape");
    }
    if (std::abs(a.h - b.h) > 1e-12 * std::max(std::abs(a.h), std::abs(b.h))) {
        throw std::invalid_argument("boundary records differ in time step");
    }
}

BoundaryRecord operator-(const BoundaryRecord& a, const BoundaryRecord& b) {
    check_compatible(a, b);
    BoundaryRecord out = a;
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = a.values[k] - b.values[k];
    return out;
}

double force_time_factor(const ForceParams& p, double t) {
    return std::cos(2.0 * std::numbers::pi * t * p.oscillations / p.period);
}

Vec2 force_direction(const ForceParams& p, Vec2 x) {
    const double dx = x.x - p.focus_x, dy = x.y - p.focus_y;
    if (dx == 0.0 && dy == 0.0) return {0.0, -1.0};
    const double psi = p.direction == DirectionMode::full_angle ? std::atan2(dy, dx) : std::atan(dy / dx);
    return {std::cos(psi), std::sin(psi)};
}

namespace {

double envelope(const ForceParams& p, Vec2 x) {
    return std::exp(-p.width * norm(x - Vec2{p.focus_x, p.focus_y}));
}

// Degree-5 Dunavant rule, barycentric points and weights (sum to 1).
struct QuadPoint {
    double l0, l1, l2, w;
};
constexpr double kA1 = 0.059715871789770, kB1 = 0.470142064105115;
constexpr double kA2 = 0.797426985353087, kB2 = 0.101286507323456;
constexpr double kW1 = 0.132394152788506, kW2 = 0.125939180544827;
constexpr QuadPoint kRule[7] = {
    {1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225}, {kA1, kB1, kB1, kW1}, {kB1, kA1, kB1, kW1}, {kB1, kB1, kA1, kW1},
    {kA2, kB2, kB2, kW2},               {kB2, kA2, kB2, kW2}, {kB2, kB2, kA2, kW2},
};

// Integrates f * phi_k over the sub-triangle (q0, q1, q2) of the element whose
// hat functions are given as barycentric coordinates of the sub-vertices.
void integrate_subtriangle(const ForceParams& p, const std::array<Vec2, 3>& q,
                           const std::array<std::array<double, 3>, 3>& bary, int depth,
                           std::array<double, 6>& acc) {
    const Vec2 focus{p.focus_x, p.focus_y};
    const Vec2 c = (1.0 / 3.0) * (q[0] + q[1] + q[2]);
    const double diam = std::max({norm(q[1] - q[0]), norm(q[2] - q[1]), norm(q[0] - q[2])});
    const double dist = norm(c - focus);
    if (p.width * std::max(0.0, dist - diam) > 60.0) return;  // exp(-60) ~ 1e-26

    const double scale = p.width > 0.0 ? 0.1 / p.width : 1.0;
    if (depth < 24 && p.width > 0.0 && diam > 0.5 * std::max(dist - diam, scale)) {
        std::array<Vec2, 3> mid{0.5 * (q[0] + q[1]), 0.5 * (q[1] + q[2]), 0.5 * (q[2] + q[0])};
        std::array<std::array<double, 3>, 3> bm;
        for (int k = 0; k < 3; ++k) {
            bm[0][k] = 0.5 * (bary[0][k] + bary[1][k]);
            bm[1][k] = 0.5 * (bary[1][k] + bary[2][k]);
            bm[2][k] = 0.5 * (bary[2][k] + bary[0][k]);
        }
        integrate_subtriangle(p, {q[0], mid[0], mid[2]}, {bary[0], bm[0], bm[2]}, depth + 1, acc);
        integrate_subtriangle(p, {mid[0], q[1], mid[1]}, {bm[0], bary[1], bm[1]}, depth + 1, acc);
        integrate_subtriangle(p, {mid[2], mid[1], q[2]}, {bm[2], bm[1], bary[2]}, depth + 1, acc);
        integrate_subtriangle(p, {mid[0], mid[1], mid[2]}, {bm[0], bm[1], bm[2]}, depth + 1, acc);
        return;
    }
    const double area = 0.5 * std::abs((q[1].x - q[0].x) * (q[2].y - q[0].y) - (q[2].x - q[0].x) * (q[1].y - q[0].y));
    for (const auto& qp : kRule) {
        const Vec2 x = qp.l0 * q[0] + qp.l1 * q[1] + qp.l2 * q[2];
        const Vec2 dir = force_direction(p, x);
        const double f = p.amplitude * envelope(p, x) * qp.w * area;
        for (int k = 0; k < 3; ++k) {
            const double phi = qp.l0 * bary[0][k] + qp.l1 * bary[1][k] + qp.l2 * bary[2][k];
            acc[2 * k] += f * dir.x * phi;
            acc[2 * k + 1] += f * dir.y * phi;
        }
    }
}

}  // namespace

VectorField laser_force(const ForceParams& p, double t, const Mesh& mesh) {
    VectorField f(mesh.node_count());
    const double a = p.amplitude * force_time_factor(p, t);
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        const Vec2 x = mesh.node(i);
        const Vec2 d = force_direction(p, x);
        const double s = a * envelope(p, x);
        f.x(i) = s * d.x;
        f.y(i) = s * d.y;
    }
    return f;
}

std::vector<double> laser_load_profile(const ForceParams& p, const Mesh& mesh) {
    p.validate();
    std::vector<double> load(2 * mesh.node_count(), 0.0);
    const std::array<std::array<double, 3>, 3> identity{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangle(t);
        std::array<double, 6> acc{};
        integrate_subtriangle(p, {mesh.node(tri[0]), mesh.node(tri[1]), mesh.node(tri[2])}, identity, 0, acc);
        for (int k = 0; k < 3; ++k) {
            load[2 * tri[k]] += acc[2 * k];
            load[2 * tri[k] + 1] += acc[2 * k + 1];
        }
    }
    return load;
}

std::vector<double> load_vector(const Mesh& mesh, const VectorField& f) {
    check_size(mesh, f, "load_vector");
    std::vector<double> out(f.values.size(), 0.0);
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangle(t);
        const double a = mesh.area(t) / 12.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double m = (i == j ? 2.0 : 1.0) * a;
                out[2 * tri[i]] += m * f.x(tri[j]);
                out[2 * tri[i] + 1] += m * f.y(tri[j]);
            }
    }
    return out;
}

VectorField initial_back_step(const VectorField& u0, const VectorField& v0, double h) {
    if (u0.values.size() != v0.values.size()) throw std::invalid_argument("initial fields differ in size");
    VectorField out = u0;
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] -= h * v0.values[k];
    return out;
}

VectorField implicit_step(const SparseOperator& mass, const SparseOperator& stiffness, const VectorField& u_n,
                          const VectorField& u_nm1, std::span<const double> load, double h, double tol,
                          int max_iter) {
    const std::size_t n = mass.size();
    if (stiffness.size() != n || u_n.values.size() != n || u_nm1.values.size() != n) {
        throw std::invalid_argument("implicit_step: size mismatch");
    }
    if (!load.empty() && load.size() != n) throw std::invalid_argument("implicit_step: load size mismatch");
    std::vector<double> extrap(n);
    for (std::size_t k = 0; k < n; ++k) extrap[k] = 2.0 * u_n.values[k] - u_nm1.values[k];
    std::vector<double> rhs = mass * extrap;
    if (!load.empty()) {
        for (std::size_t k = 0; k < n; ++k) rhs[k] += h * h * load[k];
    }
    const SparseOperator system = mass.add_scaled(stiffness, h * h);
    auto solved = solve_spd(system, rhs, tol, max_iter, extrap);
    if (!solved.report.converged) throw SolverError(0, solved.report);
    return VectorField(std::move(solved.x));
}

namespace {

std::vector<int> dirichlet_dofs(const Mesh& mesh, const SimConfig& cfg) {
    std::vector<int> dofs;
    for (Side s : {Side::Top, Side::Bottom, Side::Left, Side::Right}) {
        if (cfg.bc[static_cast<std::size_t>(s)] != BoundaryCondition::dirichlet_zero) continue;
        for (int v : boundary_nodes(mesh, s)) {
            dofs.push_back(2 * v);
            dofs.push_back(2 * v + 1);
        }
    }
    std::sort(dofs.begin(), dofs.end());
    dofs.erase(std::unique(dofs.begin(), dofs.end()), dofs.end());
    return dofs;
}

}  // namespace

WaveSystem::WaveSystem(const Mesh& mesh, const ScalarField& rho, const ScalarField& lambda, const ScalarField& mu,
                       const SimConfig& cfg)
    : mesh_(&mesh),
      cfg_(cfg),
      mass_(assemble_mass(mesh, rho, cfg.quadrature)),
      stiffness_(assemble_stiffness(mesh, lambda, mu)),
      fixed_(dirichlet_dofs(mesh, cfg)) {
    cfg_.validate();
    system_ = mass_.add_scaled(stiffness_, cfg_.h * cfg_.h);
    if (!fixed_.empty()) system_ = system_.with_identity_rows(fixed_);
}

WaveSystem WaveSystem::from_level_set(const Mesh& mesh, const LevelSet& ls, const MaterialModel& model,
                                      const SimConfig& cfg) {
    const auto stiff = stiffness_fields(ls, model);
    return WaveSystem(mesh, density_field(ls, model), stiff.lambda, stiff.mu, cfg);
}

VectorField WaveSystem::solve_step(int step, std::span<const double> rhs, const VectorField& guess) const {
    auto solved = solve_spd(system_, rhs, cfg_.solver_tol, cfg_.max_iter, guess.values);
    if (!solved.report.converged) throw SolverError(step, solved.report);
    return VectorField(std::move(solved.x));
}

TimeSeries WaveSystem::march_forward(const LoadFn& load, const VectorField& u0_in, const VectorField& v0_in) const {
    const std::size_t n = 2 * mesh_->node_count();
    const VectorField u0 = u0_in.values.empty() ? VectorField(mesh_->node_count()) : u0_in;
    const VectorField v0 = v0_in.values.empty() ? VectorField(mesh_->node_count()) : v0_in;
    check_size(*mesh_, u0, "initial displacement");
    check_size(*mesh_, v0, "initial velocity");

    TimeSeries ts;
    ts.h = cfg_.h;
    ts.direction = TimeDirection::forward;
    ts.stride = cfg_.frame_stride;
    ts.outside = initial_back_step(u0, v0, cfg_.h);
    ts.frames.push_back(u0);

    VectorField prev = ts.outside, cur = u0;
    std::vector<double> f(n), extrap(n), rhs(n);
    for (int step = 0; step < cfg_.n_steps; ++step) {
        std::fill(f.begin(), f.end(), 0.0);
        if (load) load(step, f);
        for (std::size_t k = 0; k < n; ++k) extrap[k] = 2.0 * cur.values[k] - prev.values[k];
        mass_.multiply(extrap, rhs);
        const double h2 = cfg_.h * cfg_.h;
        for (std::size_t k = 0; k < n; ++k) rhs[k] += h2 * f[k];
        for (int d : fixed_) rhs[static_cast<std::size_t>(d)] = 0.0;
        VectorField next = solve_step(step + 1, rhs, VectorField(extrap));
        prev = std::move(cur);
        cur = std::move(next);
        if ((step + 1) % cfg_.frame_stride == 0) ts.frames.push_back(cur);
    }
    return ts;
}

TimeSeries WaveSystem::march_backward(const LoadFn& load) const {
    const std::size_t n = 2 * mesh_->node_count();
    const int last = cfg_.n_steps;
    TimeSeries ts;
    ts.h = cfg_.h;
    ts.direction = TimeDirection::backward;
    ts.outside = VectorField(mesh_->node_count());
    ts.frames.assign(static_cast<std::size_t>(last) + 1, VectorField(mesh_->node_count()));

    VectorField next2(mesh_->node_count()), next(mesh_->node_count());
    std::vector<double> f(n), extrap(n), rhs(n);
    for (int m = last; m >= 1; --m) {
        std::fill(f.begin(), f.end(), 0.0);
        if (load) load(m, f);
        for (std::size_t k = 0; k < n; ++k) extrap[k] = 2.0 * next.values[k] - next2.values[k];
        mass_.multiply(extrap, rhs);
        const double h2 = cfg_.h * cfg_.h;
        for (std::size_t k = 0; k < n; ++k) rhs[k] += h2 * f[k];
        for (int d : fixed_) rhs[static_cast<std::size_t>(d)] = 0.0;
        VectorField v = solve_step(m, rhs, VectorField(extrap));
        ts.frames[static_cast<std::size_t>(m)] = v;
        next2 = std::move(next);
        next = std::move(v);
    }
    return ts;
}

BoundaryRecord record_boundary(const Mesh& mesh, const TimeSeries& ts, Side side) {
    BoundaryRecord rec;
    rec.gamma_nodes = boundary_nodes(mesh, side);
    for (int v : rec.gamma_nodes) {
        rec.gamma_x.push_back(side == Side::Top || side == Side::Bottom ? mesh.node(v).x : mesh.node(v).y);
    }
    rec.n_frames = ts.frames.size();
    rec.h = ts.h * ts.stride;
    rec.values.reserve(rec.n_frames * rec.width());
    for (const auto& frame : ts.frames) {
        for (int v : rec.gamma_nodes) rec.values.push_back(frame.y(static_cast<std::size_t>(v)));
    }
    return rec;
}

ForwardRun run_forward(const WaveSystem& system, const std::vector<double>& load_profile, const ForceParams& force) {
    const auto& cfg = system.config();
    WaveSystem::LoadFn load = [&](int step, std::span<double> f) {
        const double s = force_time_factor(force, step * cfg.h);
        for (std::size_t k = 0; k < f.size(); ++k) f[k] = s * load_profile[k];
    };
    ForwardRun run;
    run.series = system.march_forward(load, cfg.u0, cfg.v0);
    run.record = record_boundary(system.mesh(), run.series);
    return run;
}

ForwardRun run_forward(const Mesh& mesh, const LevelSet& ls, const MaterialModel& model, const ForceParams& force,
                       const SimConfig& cfg) {
    const WaveSystem system = WaveSystem::from_level_set(mesh, ls, model, cfg);
    return run_forward(system, laser_load_profile(force, mesh), force);
}

std::vector<VectorField> velocity_series(const TimeSeries& ts) {
    if (ts.frames.empty()) return {};
    const double dt = ts.h * ts.stride;
    const std::size_t count = ts.frames.size();
    std::vector<VectorField> out(count, VectorField(ts.frames[0].node_count()));
    for (std::size_t m = 0; m < count; ++m) {
        const VectorField* a;
        const VectorField* b;
        if (ts.direction == TimeDirection::forward) {
            a = &ts.frames[m];
            b = m == 0 ? &ts.outside : &ts.frames[m - 1];
        } else {
            a = m + 1 == count ? &ts.outside : &ts.frames[m + 1];
            b = &ts.frames[m];
        }
        for (std::size_t k = 0; k < out[m].values.size(); ++k) out[m].values[k] = (a->values[k] - b->values[k]) / dt;
    }
    return out;
}

std::vector<double> element_dilation(const Mesh& mesh, const VectorField& u) {
    check_size(mesh, u, "dilation");
    std::vector<double> div(mesh.triangle_count()), frob(mesh.triangle_count());
    double scale = 0.0;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangle(t);
        const auto& g = mesh.shape_gradients(t);
        double a11 = 0, a12 = 0, a21 = 0, a22 = 0;
        for (int k = 0; k < 3; ++k) {
            a11 += u.x(tri[k]) * g[k].x;
            a12 += u.x(tri[k]) * g[k].y;
            a21 += u.y(tri[k]) * g[k].x;
            a22 += u.y(tri[k]) * g[k].y;
        }
        div[t] = a11 + a22;
        frob[t] = std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22);
        scale = std::max(scale, frob[t]);
    }
    std::vector<double> out(mesh.triangle_count(), 0.0);
    for (std::size_t t = 0; t < out.size(); ++t) {
        if (frob[t] > 1e-14 * scale && frob[t] > 0.0) out[t] = div[t] / frob[t];
    }
    return out;
}

ScalarField dilation(const Mesh& mesh, const VectorField& u) {
    const auto per_tri = element_dilation(mesh, u);
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

double immersed_profile(double y, double l_y, double eps) {
    const double sech = 1.0 / std::cosh((y - l_y) / eps);
    return sech * sech / (2.0 * eps);
}

VectorField immersed_dirichlet_force(const Mesh& mesh, const VectorField& u, const std::vector<int>& gamma_nodes,
                                     std::span<const double> delta_frame, double l_y, double eps,
                                     double eps_tilde) {
    check_size(mesh, u, "immersed_dirichlet_force");
    if (!(eps > 0.0) || !(eps_tilde > 0.0)) throw std::invalid_argument("immersed force: eps must be positive");
    if (gamma_nodes.empty() || delta_frame.size() != gamma_nodes.size()) {
        throw std::invalid_argument("immersed force: delta frame does not match gamma nodes");
    }
    std::vector<double> gx;
    gx.reserve(gamma_nodes.size());
    for (int v : gamma_nodes) gx.push_back(mesh.node(v).x);

    VectorField f(mesh.node_count());
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        const Vec2 p = mesh.node(i);
        std::size_t nearest = 0;
        for (std::size_t j = 1; j < gx.size(); ++j) {
            if (std::abs(gx[j] - p.x) < std::abs(gx[nearest] - p.x)) nearest = j;
        }
        f.y(i) = (2.0 / eps_tilde) * (u.y(i) - delta_frame[nearest]) * immersed_profile(p.y, l_y, eps);
    }
    return f;
}

TimeSeries run_adjoint(const WaveSystem& system, const BoundaryRecord& residual, const AdjointParams& params,
                       const TimeSeries* forward) {
    const auto& cfg = system.config();
    const Mesh& mesh = system.mesh();
    if (residual.n_frames != static_cast<std::size_t>(cfg.n_steps) + 1) {
        throw std::invalid_argument("adjoint: residual frames do not match the step count");
    }
    if (!(params.eps_tilde > 0.0)) throw std::invalid_argument("adjoint: eps_tilde must be positive");

    if (params.mode == AdjointMode::reversed_time) {
        // Load of the discrete adjoint: -(2/eps_tilde) w_m b_j r_mj on the second component.
        const auto b = residual.node_weights();
        const int last = cfg.n_steps;
        WaveSystem::LoadFn load = [&](int m, std::span<double> f) {
            const double wt = (m == 0 || m == last) ? 0.5 : 1.0;
            for (std::size_t j = 0; j < residual.width(); ++j) {
                f[2 * static_cast<std::size_t>(residual.gamma_nodes[j]) + 1] =
                    -(2.0 / params.eps_tilde) * wt * b[j] * residual.at(static_cast<std::size_t>(m), j);
            }
        };
        return system.march_backward(load);
    }

    if (forward == nullptr || forward->frames.size() != residual.n_frames) {
        throw std::invalid_argument("adjoint: immersed_forward mode needs the full forward series");
    }
    WaveSystem::LoadFn load = [&](int n, std::span<double> f) {
        const auto& u = forward->frames[static_cast<std::size_t>(n)];
        std::vector<double> delta(residual.width());
        for (std::size_t j = 0; j < delta.size(); ++j) {
            delta[j] = u.y(static_cast<std::size_t>(residual.gamma_nodes[j])) - residual.at(static_cast<std::size_t>(n), j);
        }
        const VectorField fg = immersed_dirichlet_force(mesh, u, residual.gamma_nodes, delta, params.immersed_center_y,
                                                        params.immersed_eps, params.eps_tilde);
        const auto l = load_vector(mesh, fg);
        std::copy(l.begin(), l.end(), f.begin());
    };
    return system.march_forward(load, {}, {});
}

}  // namespace elastinv

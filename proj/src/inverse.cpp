#include "elastinv/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "elastinv/parallel.hpp"

namespace elastinv {

void InverseConfig::validate() const {
    if (!(eps_tilde > 0.0)) throw std::invalid_argument("eps_tilde must be positive");
    if (!(tau_star > 0.0)) throw std::invalid_argument("tau_star must be positive");
    if (max_outer_iters < 0) throw std::invalid_argument("max_outer_iters must be >= 0");
    if (max_halvings < 0) throw std::invalid_argument("max_halvings must be >= 0");
    if (reinit_every < 1) throw std::invalid_argument("reinit_every must be >= 1");
    if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("cfl must be in (0, 1]");
    if (!(immersed_eps > 0.0)) throw std::invalid_argument("immersed_eps must be positive");
}

double cost(const BoundaryRecord& sim, const BoundaryRecord& delta, double eps_tilde) {
    check_compatible(sim, delta);
    if (!(eps_tilde > 0.0)) throw std::invalid_argument("eps_tilde must be positive");
    const auto b = sim.node_weights();
    double total = 0.0;
    for (std::size_t n = 0; n < sim.n_frames; ++n) {
        const double wt = (n == 0 || n + 1 == sim.n_frames) ? 0.5 : 1.0;
        double row = 0.0;
        for (std::size_t j = 0; j < sim.width(); ++j) {
            const double r = sim.at(n, j) - delta.at(n, j);
            row += b[j] * r * r;
        }
        total += wt * sim.h * row;
    }
    return total / eps_tilde;
}

namespace {

struct ElementStrain {
    double div;
    double exx, eyy, exy;
};

ElementStrain strain(const Mesh& mesh, std::size_t t, const VectorField& u) {
    const auto& tri = mesh.triangle(t);
    const auto& g = mesh.shape_gradients(t);
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;
    for (int k = 0; k < 3; ++k) {
        a11 += u.x(tri[k]) * g[k].x;
        a12 += u.x(tri[k]) * g[k].y;
        a21 += u.y(tri[k]) * g[k].x;
        a22 += u.y(tri[k]) * g[k].y;
    }
    return {a11 + a22, a11, a22, 0.5 * (a12 + a21)};
}

// integral over triangle t of u . v for P1 fields (both components)
double element_mass_product(const Mesh& mesh, std::size_t t, const VectorField& u, const VectorField& v) {
    const auto& tri = mesh.triangle(t);
    const double a = mesh.area(t) / 12.0;
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double m = (i == j ? 2.0 : 1.0) * a;
            s += m * (u.x(tri[i]) * v.x(tri[j]) + u.y(tri[i]) * v.y(tri[j]));
        }
    return s;
}

}  // namespace

ScalarField gradient(const Mesh& mesh, const LevelSet& ls, const MaterialModel& model, const TimeSeries& forward,
                     const TimeSeries& adjoint, InertiaSign inertia_sign) {
    check_size(mesh, ls.theta, "gradient");
    if (forward.frames.size() != adjoint.frames.size() || forward.frames.empty()) {
        throw std::invalid_argument("gradient: forward and adjoint frame counts differ");
    }
    if (forward.stride != 1 || adjoint.stride != 1) throw std::invalid_argument("gradient: needs every time frame");
    if (std::abs(forward.h - adjoint.h) > 1e-12 * forward.h) throw std::invalid_argument("gradient: time steps differ");
    for (const auto& f : forward.frames) check_size(mesh, f, "gradient forward frame");
    for (const auto& f : adjoint.frames) check_size(mesh, f, "gradient adjoint frame");

    const double h = forward.h;
    const auto ut = velocity_series(forward);
    const auto vt = velocity_series(adjoint);

    // Time integrals per element of the three coefficient kernels.
    const std::size_t nt = mesh.triangle_count();
    std::vector<double> mass_term(nt, 0.0), lambda_term(nt, 0.0), mu_term(nt, 0.0);
    for (std::size_t m = 0; m < forward.frames.size(); ++m) {
        const auto& u = forward.frames[m];
        const auto& v = adjoint.frames[m];
        for (std::size_t t = 0; t < nt; ++t) {
            mass_term[t] -= h * element_mass_product(mesh, t, ut[m], vt[m]);
            const auto su = strain(mesh, t, u);
            const auto sv = strain(mesh, t, v);
            const double area = mesh.area(t);
            lambda_term[t] += h * area * su.div * sv.div;
            mu_term[t] += h * area * 2.0 * (su.exx * sv.exx + su.eyy * sv.eyy + 2.0 * su.exy * sv.exy);
        }
    }

    ScalarField drho = density_derivative_field(ls, model);
    if (inertia_sign == InertiaSign::literal)
        for (auto& d : drho.values) d = -d;
    const auto dstiff = stiffness_derivative_fields(ls, model);
    ScalarField g(mesh.node_count());
    for (std::size_t t = 0; t < nt; ++t) {
        for (int k : mesh.triangle(t)) {
            g[k] += (drho[k] * mass_term[t] + dstiff.lambda[k] * lambda_term[t] + dstiff.mu[k] * mu_term[t]) / 3.0;
        }
    }
    for (std::size_t i = 0; i < g.size(); ++i) g[i] /= mesh.nodal_areas()[i];
    return g;
}

double inner_product(const Mesh& mesh, const ScalarField& a, const ScalarField& b) {
    check_size(mesh, a, "inner_product");
    check_size(mesh, b, "inner_product");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += mesh.nodal_areas()[i] * a[i] * b[i];
    return s;
}

BoundaryRecord synthesize_data(const Mesh& mesh, const LevelSet& target, const MaterialModel& model,
                               const ForceParams& force, const SimConfig& cfg) {
    return run_forward(mesh, target, model, force, cfg).record;
}

InverseProblem::InverseProblem(const Mesh& mesh, MaterialModel model, ForceParams force, SimConfig sim,
                               BoundaryRecord delta, InverseConfig cfg)
    : mesh_(&mesh),
      model_(std::move(model)),
      force_(force),
      sim_(std::move(sim)),
      delta_(std::move(delta)),
      cfg_(cfg) {
    cfg_.validate();
    sim_.validate();
    if (sim_.frame_stride != 1) throw std::invalid_argument("inversion needs frame_stride = 1");
    if (delta_.n_frames != static_cast<std::size_t>(sim_.n_steps) + 1) {
        throw std::invalid_argument("boundary data has " + std::to_string(delta_.n_frames) + " frames, expected " +
                                    std::to_string(sim_.n_steps + 1));
    }
    if (delta_.gamma_nodes != boundary_nodes(mesh, Side::Top)) {
        throw std::invalid_argument("boundary data does not match the top boundary of the mesh");
    }
    if (std::abs(delta_.h - sim_.h) > 1e-9 * sim_.h) throw std::invalid_argument("boundary data time step differs");
    load_profile_ = laser_load_profile(force_, mesh);
}

InverseProblem::Evaluation InverseProblem::evaluate(const LevelSet& ls) const {
    const WaveSystem system = WaveSystem::from_level_set(*mesh_, ls, model_, sim_);
    Evaluation e;
    e.forward = run_forward(system, load_profile_, force_);
    e.cost = elastinv::cost(e.forward.record, delta_, cfg_.eps_tilde);
    return e;
}

InverseProblem::GradientResult InverseProblem::gradient(const LevelSet& ls) const {
    const WaveSystem system = WaveSystem::from_level_set(*mesh_, ls, model_, sim_);
    ForwardRun fwd = run_forward(system, load_profile_, force_);
    GradientResult out;
    out.cost = elastinv::cost(fwd.record, delta_, cfg_.eps_tilde);
    AdjointParams ap;
    ap.mode = cfg_.adjoint_mode;
    ap.eps_tilde = cfg_.eps_tilde;
    ap.immersed_eps = cfg_.immersed_eps;
    ap.immersed_center_y = force_.focus_y;
    out.adjoint = run_adjoint(system, fwd.record - delta_, ap, &fwd.series);
    out.forward = std::move(fwd.series);
    out.g = elastinv::gradient(*mesh_, ls, model_, out.forward, out.adjoint, cfg_.inertia_sign);
    return out;
}

ScalarField InverseProblem::descent_speed(const ScalarField& g) const {
    double gmax = 0.0;
    for (double v : g.values) gmax = std::max(gmax, std::abs(v));
    ScalarField s(g.size());
    if (gmax == 0.0) return s;
    for (std::size_t i = 0; i < g.size(); ++i) s[i] = cfg_.normalize_gradient ? g[i] / gmax : g[i];
    return s;
}

std::vector<std::pair<double, double>> InverseProblem::cost_profile(const LevelSet& ls, const ScalarField& speed,
                                                                    const std::vector<double>& taus) const {
    check_size(*mesh_, speed, "cost_profile");
    std::vector<std::pair<double, double>> out(taus.size());
    parallel_for(taus.size(), [&](std::size_t k) {
        const double tau = taus[k];
        if (!std::isfinite(tau)) throw std::invalid_argument("cost_profile: tau must be finite");
        LevelSet shifted = ls;
        for (std::size_t i = 0; i < shifted.theta.size(); ++i) shifted.theta[i] -= tau * speed[i];
        out[k] = {tau, cost_at(shifted)};
    });
    return out;
}

GradientCheck InverseProblem::fd_gradient_check(const LevelSet& ls, const ScalarField& direction, double s) const {
    if (!(s > 0.0)) throw std::invalid_argument("fd_gradient_check: step must be positive");
    check_size(*mesh_, direction, "fd_gradient_check");
    GradientCheck out;
    const auto gr = gradient(ls);
    out.analytic = inner_product(*mesh_, gr.g, direction);
    LevelSet plus = ls, minus = ls;
    for (std::size_t i = 0; i < ls.theta.size(); ++i) {
        plus.theta[i] += s * direction[i];
        minus.theta[i] -= s * direction[i];
    }
    out.numeric = (cost_at(plus) - cost_at(minus)) / (2.0 * s);
    out.rel_error = std::abs(out.analytic - out.numeric) /
                    std::max(std::abs(out.numeric), std::numeric_limits<double>::min());
    return out;
}

double InverseProblem::data_scale() const {
    BoundaryRecord zero = delta_;
    std::fill(zero.values.begin(), zero.values.end(), 0.0);
    return elastinv::cost(zero, delta_, cfg_.eps_tilde);
}

namespace {

IterationRecord make_record(const Mesh& mesh, int iter, double c, const LevelSet& ls, double tau) {
    IterationRecord r;
    r.iter = iter;
    r.cost = c;
    r.theta = ls.theta;
    const auto geo = inclusion_geometry(mesh, ls);
    r.centroid = geo.centroid;
    r.area = geo.area;
    r.components = inclusion_components(mesh, ls);
    r.tau_accepted = tau;
    return r;
}

}  // namespace

InversionResult InverseProblem::invert(const LevelSet& initial) const {
    check_size(*mesh_, initial.theta, "invert");
    InversionResult result;
    LevelSet theta = initial;
    GradientResult gr = gradient(theta);
    result.history.push_back(make_record(*mesh_, 0, gr.cost, theta, 0.0));
    const double zero_threshold = 1e-10 * data_scale();

    for (int k = 1; k <= cfg_.max_outer_iters; ++k) {
        if (gr.cost <= zero_threshold) {
            result.converged = true;
            result.stop_reason = "cost is zero at data scale";
            break;
        }
        const ScalarField speed = descent_speed(gr.g);
        if (std::all_of(speed.values.begin(), speed.values.end(), [](double v) { return v == 0.0; })) {
            result.stalled = true;
            result.stop_reason = "gradient vanishes";
            break;
        }

        double tau = cfg_.tau_star;
        bool accepted = false;
        LevelSet candidate;
        for (int attempt = 0; attempt <= cfg_.max_halvings; ++attempt) {
            candidate = evolve(*mesh_, theta, speed, tau, cfg_.cfl);
            if (k % cfg_.reinit_every == 0) candidate = reinitialize(*mesh_, candidate).ls;
            if (cfg_.line_search == LineSearch::fixed_tau || cost_at(candidate) < gr.cost) {
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if (!accepted) {
            result.stalled = true;
            result.stop_reason = "line search found no decrease";
            break;
        }
        theta = std::move(candidate);
        gr = gradient(theta);
        result.history.push_back(make_record(*mesh_, k, gr.cost, theta, tau));

        const std::size_t n = result.history.size();
        if (n > 5) {
            const double old = result.history[n - 6].cost;
            if (old > 0.0 && (old - gr.cost) / old < cfg_.convergence_tol) {
                result.converged = true;
                result.stop_reason = "relative decrease below tolerance over 5 iterations";
                break;
            }
        }
    }
    if (result.stop_reason.empty()) {
        if (result.history.back().cost <= zero_threshold && cfg_.max_outer_iters > 0) {
            result.converged = true;
            result.stop_reason = "cost is zero at data scale";
        } else {
            result.stop_reason = "iteration limit";
        }
    }
    return result;
}

ScalarField smooth_random_direction(const Mesh& mesh, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0), phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_int_distribution<int> freq(1, 3);
    struct Mode {
        double a, kx, ky, px, py;
    };
    std::vector<Mode> modes;
    for (int k = 0; k < 4; ++k) modes.push_back({amp(rng), double(freq(rng)), double(freq(rng)), phase(rng), phase(rng)});
    ScalarField d = sample_field(mesh, [&](double x, double y) {
        double s = 0.0;
        for (const auto& m : modes) {
            s += m.a * std::sin(std::numbers::pi * m.kx * x + m.px) * std::sin(std::numbers::pi * m.ky * y + m.py);
        }
        return s;
    });
    double dmax = 0.0;
    for (double v : d.values) dmax = std::max(dmax, std::abs(v));
    if (dmax > 0.0) {
        for (auto& v : d.values) v /= dmax;
    }
    return d;
}

}  // namespace elastinv

#include "elastinv/commands.hpp"

#include <cstdio>
#include <json.hpp>

#include "elastinv/io.hpp"

namespace elastinv {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

json manifest_base(const char* command, const RunConfig& cfg) {
    json m;
    m["command"] = command;
    json c = json::object();
    for (const auto& [section, keys] : config_to_ini(cfg)) {
        json s = json::object();
        for (const auto& [k, v] : keys) s[k] = v;
        c[section] = s;
    }
    m["config"] = c;
    m["outputs"] = json::array();
    return m;
}

void finish(json& m, const RunConfig& cfg) { write_text(cfg.output_dir / "manifest.json", m.dump(2) + "\n"); }

std::string numbered(const char* stem, int k, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%04d.%s", stem, k, ext);
    return buf;
}

BoundaryRecord synthesize_target(const RunConfig& cfg, const Mesh& mesh) {
    if (cfg.target.empty()) throw ConfigError("geometry.target required");
    return synthesize_data(mesh, layout_level_set(mesh, cfg.target), cfg.material(), cfg.force, cfg.sim);
}

}  // namespace

int cmd_forward(const RunConfig& cfg) {
    cfg.validate();
    const Mesh mesh = cfg.build_mesh();
    const auto run = run_forward(mesh, layout_level_set(mesh, cfg.initial), cfg.material(), cfg.force, cfg.sim);

    json m = manifest_base("forward", cfg);
    write_boundary_csv(cfg.output_dir / "boundary.csv", run.record);
    m["outputs"].push_back("boundary.csv");
    if (cfg.snapshot_stride > 0) {
        for (std::size_t n = 0; n < run.series.frames.size(); n += cfg.snapshot_stride) {
            const auto& u = run.series.frames[n];
            const int step = static_cast<int>(n) * run.series.stride;
            write_nodal_csv(cfg.output_dir / numbered("dilation", step, "csv"), mesh, dilation(mesh, u), "dilation");
            write_ppm(cfg.output_dir / numbered("dilation", step, "ppm"), mesh, element_dilation(mesh, u));
            m["outputs"].push_back(numbered("dilation", step, "csv"));
            m["outputs"].push_back(numbered("dilation", step, "ppm"));
        }
    }
    m["n_frames"] = run.record.n_frames;
    m["gamma_nodes"] = run.record.width();
    finish(m, cfg);
    return exit_ok;
}

int cmd_synthesize(const RunConfig& cfg) {
    cfg.validate();
    const Mesh mesh = cfg.build_mesh();
    const auto delta = synthesize_target(cfg, mesh);
    json m = manifest_base("synthesize", cfg);
    write_boundary_csv(cfg.output_dir / "delta.csv", delta);
    m["outputs"].push_back("delta.csv");
    m["n_frames"] = delta.n_frames;
    finish(m, cfg);
    return exit_ok;
}

int cmd_invert(const RunConfig& cfg, const fs::path& delta_path) {
    cfg.validate();
    const Mesh mesh = cfg.build_mesh();
    BoundaryRecord delta;
    try {
        delta = load_boundary_csv(delta_path, mesh, cfg.sim);
    } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
    }
    const InverseProblem problem(mesh, cfg.material(), cfg.force, cfg.sim, std::move(delta), cfg.inverse);
    const auto result = problem.invert(layout_level_set(mesh, cfg.initial));

    json m = manifest_base("invert", cfg);
    m["delta"] = delta_path.string();
    write_history_csv(cfg.output_dir / "history.csv", result.history);
    m["outputs"].push_back("history.csv");
    for (std::size_t k = 0; k < result.history.size(); ++k) {
        const auto& rec = result.history[k];
        const bool last = k + 1 == result.history.size();
        if (!last && (cfg.theta_stride == 0 || rec.iter % cfg.theta_stride != 0)) continue;
        write_nodal_csv(cfg.output_dir / numbered("theta", rec.iter, "csv"), mesh, rec.theta, "theta");
        m["outputs"].push_back(numbered("theta", rec.iter, "csv"));
    }
    m["iterations"] = result.history.empty() ? 0 : result.history.back().iter;
    m["initial_cost"] = format_double(result.history.front().cost);
    m["final_cost"] = format_double(result.history.back().cost);
    m["stalled"] = result.stalled;
    m["converged"] = result.converged;
    m["stop_reason"] = result.stop_reason;
    finish(m, cfg);
    return result.stalled ? exit_stalled : exit_ok;
}

int cmd_gradcheck(const RunConfig& cfg, double threshold) {
    cfg.validate();
    if (!(threshold >= 0.0)) throw ConfigError("threshold must be non-negative");
    const Mesh mesh = cfg.build_mesh();
    auto delta = synthesize_target(cfg, mesh);
    const InverseProblem problem(mesh, cfg.material(), cfg.force, cfg.sim, std::move(delta), cfg.inverse);
    const LevelSet ls = layout_level_set(mesh, cfg.initial);

    double theta_max = 0.0;
    for (double v : ls.theta.values) theta_max = std::max(theta_max, std::abs(v));
    const double s = cfg.gradcheck_step * theta_max;

    std::vector<GradientCheck> rows;
    bool pass = true;
    for (int k = 0; k < cfg.gradcheck_directions; ++k) {
        const auto dir = smooth_random_direction(mesh, cfg.seed + static_cast<unsigned>(k));
        rows.push_back(problem.fd_gradient_check(ls, dir, s));
        pass = pass && rows.back().rel_error <= threshold;
    }

    json m = manifest_base("gradcheck", cfg);
    write_gradcheck_csv(cfg.output_dir / "gradcheck.csv", rows);
    m["outputs"].push_back("gradcheck.csv");
    m["threshold"] = format_double(threshold);
    m["fd_step"] = format_double(s);
    m["passed"] = pass;
    finish(m, cfg);
    return pass ? exit_ok : exit_threshold;
}

int cmd_profile(const RunConfig& cfg, const fs::path& delta_path) {
    cfg.validate();
    const Mesh mesh = cfg.build_mesh();
    BoundaryRecord delta;
    try {
        delta = load_boundary_csv(delta_path, mesh, cfg.sim);
    } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
    }
    const InverseProblem problem(mesh, cfg.material(), cfg.force, cfg.sim, std::move(delta), cfg.inverse);
    const LevelSet ls = layout_level_set(mesh, cfg.initial);
    const auto speed = problem.descent_speed(problem.gradient(ls).g);
    const auto profile = problem.cost_profile(ls, speed, cfg.profile_taus());

    json m = manifest_base("profile", cfg);
    m["delta"] = delta_path.string();
    write_profile_csv(cfg.output_dir / "profile.csv", profile);
    m["outputs"].push_back("profile.csv");
    finish(m, cfg);
    return exit_ok;
}

}  // namespace elastinv

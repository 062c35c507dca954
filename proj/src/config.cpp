#include "elastinv/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace elastinv {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.8e", v);
    return buf;
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || trim(v.substr(pos)) != "") throw ConfigError(key + ": expected a number, got '" + v + "'");
    return out;
}

int to_int(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    long out = 0;
    try {
        out = std::stol(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || trim(v.substr(pos)) != "") throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return static_cast<int>(out);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

BoundaryCondition to_bc(const std::string& key, const std::string& v) {
    if (v == "neumann") return BoundaryCondition::neumann_zero;
    if (v == "dirichlet") return BoundaryCondition::dirichlet_zero;
    throw ConfigError(key + ": expected neumann or dirichlet, got '" + v + "'");
}

std::string bc_key(Side side) {
    std::string key = "bc_" + std::string(side_name(side));
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    return key;
}

const char* bc_name(BoundaryCondition bc) {
    return bc == BoundaryCondition::neumann_zero ? "neumann" : "dirichlet";
}

// Consumes every key of one section through a table of setters.
class SectionReader {
public:
    SectionReader(const IniData& ini, const std::string& section) : section_(section) {
        if (auto it = ini.find(section); it != ini.end()) remaining_ = it->second;
    }

    template <class Fn>
    void get(const std::string& key, Fn&& fn) {
        auto it = remaining_.find(key);
        if (it == remaining_.end()) return;
        fn(section_ + "." + key, it->second);
        remaining_.erase(it);
    }
    void number(const std::string& key, double& out) {
        get(key, [&](const std::string& k, const std::string& v) { out = to_double(k, v); });
    }
    void integer(const std::string& key, int& out) {
        get(key, [&](const std::string& k, const std::string& v) { out = to_int(k, v); });
    }
    void finish() const {
        if (!remaining_.empty())
            throw ConfigError("unknown key " + section_ + "." + remaining_.begin()->first);
    }

private:
    std::string section_;
    std::map<std::string, std::string> remaining_;
};

}  // namespace

IniData parse_ini(const std::string& text) {
    IniData out;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto c = line.find_first_of("#;");
        // ';' also separates circles inside geometry values, so only a
        // leading ';' starts a comment.
        if (c != std::string::npos && (line[c] == '#' || trim(line.substr(0, c)).empty())) line.erase(c);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            out[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside a section");
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (out[section].count(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key " + key);
        out[section][key] = trim(line.substr(eq + 1));
    }
    return out;
}

std::vector<Circle> parse_circles(const std::string& text) {
    std::vector<Circle> out;
    std::istringstream items(text);
    std::string item;
    while (std::getline(items, item, ';')) {
        item = trim(item);
        if (item.empty()) continue;
        std::istringstream in(item);
        std::string op, extra;
        Circle c;
        if (!(in >> op >> c.center.x >> c.center.y >> c.radius) || (in >> extra))
            throw ConfigError("circle '" + item + "': expected 'add|sub x y r'");
        if (op == "sub")
            c.subtract = true;
        else if (op != "add")
            throw ConfigError("circle '" + item + "': operation must be add or sub");
        if (!(c.radius > 0.0)) throw ConfigError("circle '" + item + "': radius must be positive");
        out.push_back(c);
    }
    return out;
}

std::string format_circles(const std::vector<Circle>& circles) {
    std::string out;
    for (const auto& c : circles) {
        if (!out.empty()) out += "; ";
        out += (c.subtract ? "sub " : "add ") + fmt(c.center.x) + " " + fmt(c.center.y) + " " + fmt(c.radius);
    }
    return out;
}

void RunConfig::validate() const {
    try {
        if (mesh_file.empty() && n_divisions < 2) throw ConfigError("mesh.n_divisions must be >= 2");
        if (!mesh_file.empty() && !std::filesystem::exists(mesh_file))
            throw ConfigError("mesh.file not found: " + mesh_file.string());
        material();
        force.validate();
        sim.validate();
        inverse.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (snapshot_stride < 0) throw ConfigError("output.snapshot_stride must be >= 0");
    if (theta_stride < 0) throw ConfigError("output.theta_stride must be >= 0");
    if (gradcheck_directions < 1) throw ConfigError("run.gradcheck_directions must be >= 1");
    if (!(gradcheck_step > 0.0)) throw ConfigError("run.gradcheck_step must be positive");
    if (profile_points < 1) throw ConfigError("run.profile_points must be >= 1");
    if (!(profile_tau_min <= profile_tau_max)) throw ConfigError("run.profile_tau_min exceeds profile_tau_max");
}

Mesh RunConfig::build_mesh() const {
    return mesh_file.empty() ? generate_mesh(n_divisions) : load_mesh(mesh_file);
}

std::vector<double> RunConfig::profile_taus() const {
    std::vector<double> taus(profile_points);
    if (profile_points == 1) {
        taus[0] = profile_tau_min;
        return taus;
    }
    for (int k = 0; k < profile_points; ++k) {
        const double a = static_cast<double>(k) / (profile_points - 1);
        taus[k] = profile_tau_min + a * (profile_tau_max - profile_tau_min);
    }
    // Keep an exact zero on symmetric grids.
    for (auto& t : taus)
        if (std::abs(t) < 1e-12 * std::max(std::abs(profile_tau_min), std::abs(profile_tau_max))) t = 0.0;
    return taus;
}

RunConfig config_from_ini(const IniData& ini, const std::filesystem::path& base_dir) {
    static const char* known[] = {"mesh", "material", "force", "sim", "inverse", "geometry", "output", "run"};
    for (const auto& [name, _] : ini) {
        if (std::find(std::begin(known), std::end(known), name) == std::end(known))
            throw ConfigError("unknown section [" + name + "]");
    }

    RunConfig cfg;
    {
        SectionReader r(ini, "mesh");
        r.integer("n_divisions", cfg.n_divisions);
        r.get("file", [&](const std::string&, const std::string& v) {
            std::filesystem::path p = v;
            cfg.mesh_file = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
        });
        r.finish();
    }
    {
        SectionReader r(ini, "material");
        r.number("E1", cfg.phase1.E);
        r.number("nu1", cfg.phase1.nu);
        r.number("rho1", cfg.phase1.rho);
        r.number("E2", cfg.phase2.E);
        r.number("nu2", cfg.phase2.nu);
        r.number("rho2", cfg.phase2.rho);
        r.number("eps", cfg.eps);
        r.finish();
    }
    {
        SectionReader r(ini, "force");
        auto& f = cfg.force;
        r.number("amplitude", f.amplitude);
        r.number("oscillations", f.oscillations);
        r.number("focus_x", f.focus_x);
        r.number("focus_y", f.focus_y);
        r.number("width", f.width);
        r.number("period", f.period);
        r.get("direction", [&](const std::string& k, const std::string& v) {
            if (v == "full_angle")
                f.direction = DirectionMode::full_angle;
            else if (v == "principal_arctan")
                f.direction = DirectionMode::principal_arctan;
            else
                throw ConfigError(k + ": expected full_angle or principal_arctan");
        });
        r.finish();
    }
    {
        SectionReader r(ini, "sim");
        auto& s = cfg.sim;
        r.number("h", s.h);
        r.integer("n_steps", s.n_steps);
        for (Side side : {Side::Top, Side::Bottom, Side::Left, Side::Right}) {
            r.get(bc_key(side), [&](const std::string& k, const std::string& v) {
                s.bc[static_cast<int>(side)] = to_bc(k, v);
            });
        }
        r.number("solver_tol", s.solver_tol);
        r.integer("max_iter", s.max_iter);
        r.get("quadrature", [&](const std::string& k, const std::string& v) {
            if (v == "centroid")
                s.quadrature = QuadratureRule::centroid;
            else if (v == "edge_midpoint")
                s.quadrature = QuadratureRule::edge_midpoint;
            else
                throw ConfigError(k + ": expected centroid or edge_midpoint");
        });
        r.finish();
    }
    {
        SectionReader r(ini, "inverse");
        auto& v = cfg.inverse;
        r.number("eps_tilde", v.eps_tilde);
        r.number("tau_star", v.tau_star);
        r.integer("max_outer_iters", v.max_outer_iters);
        r.get("line_search", [&](const std::string& k, const std::string& s) {
            if (s == "backtracking")
                v.line_search = LineSearch::backtracking;
            else if (s == "fixed_tau")
                v.line_search = LineSearch::fixed_tau;
            else
                throw ConfigError(k + ": expected backtracking or fixed_tau");
        });
        r.integer("max_halvings", v.max_halvings);
        r.integer("reinit_every", v.reinit_every);
        r.number("convergence_tol", v.convergence_tol);
        r.number("cfl", v.cfl);
        r.get("normalize_gradient",
              [&](const std::string& k, const std::string& s) { v.normalize_gradient = to_bool(k, s); });
        r.get("adjoint_mode", [&](const std::string& k, const std::string& s) {
            if (s == "reversed_time")
                v.adjoint_mode = AdjointMode::reversed_time;
            else if (s == "immersed_forward")
                v.adjoint_mode = AdjointMode::immersed_forward;
            else
                throw ConfigError(k + ": expected reversed_time or immersed_forward");
        });
        r.number("immersed_eps", v.immersed_eps);
        r.get("inertia_sign", [&](const std::string& k, const std::string& s) {
            if (s == "descent")
                v.inertia_sign = InertiaSign::descent;
            else if (s == "literal")
                v.inertia_sign = InertiaSign::literal;
            else
                throw ConfigError(k + ": expected descent or literal");
        });
        r.finish();
    }
    {
        SectionReader r(ini, "geometry");
        r.get("init", [&](const std::string&, const std::string& v) { cfg.initial = parse_circles(v); });
        r.get("target", [&](const std::string&, const std::string& v) { cfg.target = parse_circles(v); });
        r.finish();
    }
    {
        SectionReader r(ini, "output");
        r.get("dir", [&](const std::string&, const std::string& v) { cfg.output_dir = v; });
        r.integer("snapshot_stride", cfg.snapshot_stride);
        r.integer("theta_stride", cfg.theta_stride);
        r.finish();
    }
    {
        SectionReader r(ini, "run");
        r.get("seed", [&](const std::string& k, const std::string& v) {
            const int s = to_int(k, v);
            if (s < 0) throw ConfigError(k + " must be non-negative");
            cfg.seed = static_cast<unsigned>(s);
        });
        r.integer("gradcheck_directions", cfg.gradcheck_directions);
        r.number("gradcheck_step", cfg.gradcheck_step);
        r.number("profile_tau_min", cfg.profile_tau_min);
        r.number("profile_tau_max", cfg.profile_tau_max);
        r.integer("profile_points", cfg.profile_points);
        r.finish();
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_ini(parse_ini(ss.str()), path.parent_path());
}

IniData config_to_ini(const RunConfig& cfg) {
    IniData out;
    auto& mesh = out["mesh"];
    mesh["n_divisions"] = std::to_string(cfg.n_divisions);
    mesh["file"] = cfg.mesh_file.string();

    auto& mat = out["material"];
    mat["E1"] = fmt(cfg.phase1.E);
    mat["nu1"] = fmt(cfg.phase1.nu);
    mat["rho1"] = fmt(cfg.phase1.rho);
    mat["E2"] = fmt(cfg.phase2.E);
    mat["nu2"] = fmt(cfg.phase2.nu);
    mat["rho2"] = fmt(cfg.phase2.rho);
    mat["eps"] = fmt(cfg.eps);

    const auto& f = cfg.force;
    auto& force = out["force"];
    force["amplitude"] = fmt(f.amplitude);
    force["oscillations"] = fmt(f.oscillations);
    force["focus_x"] = fmt(f.focus_x);
    force["focus_y"] = fmt(f.focus_y);
    force["width"] = fmt(f.width);
    force["period"] = fmt(f.period);
    force["direction"] = f.direction == DirectionMode::full_angle ? "full_angle" : "principal_arctan";

    const auto& s = cfg.sim;
    auto& sim = out["sim"];
    sim["h"] = fmt(s.h);
    sim["n_steps"] = std::to_string(s.n_steps);
    for (Side side : {Side::Top, Side::Bottom, Side::Left, Side::Right})
        sim[bc_key(side)] = bc_name(s.bc[static_cast<int>(side)]);
    sim["solver_tol"] = fmt(s.solver_tol);
    sim["max_iter"] = std::to_string(s.max_iter);
    sim["quadrature"] = s.quadrature == QuadratureRule::centroid ? "centroid" : "edge_midpoint";

    const auto& v = cfg.inverse;
    auto& inv = out["inverse"];
    inv["eps_tilde"] = fmt(v.eps_tilde);
    inv["tau_star"] = fmt(v.tau_star);
    inv["max_outer_iters"] = std::to_string(v.max_outer_iters);
    inv["line_search"] = v.line_search == LineSearch::backtracking ? "backtracking" : "fixed_tau";
    inv["max_halvings"] = std::to_string(v.max_halvings);
    inv["reinit_every"] = std::to_string(v.reinit_every);
    inv["convergence_tol"] = fmt(v.convergence_tol);
    inv["cfl"] = fmt(v.cfl);
    inv["normalize_gradient"] = v.normalize_gradient ? "true" : "false";
    inv["adjoint_mode"] = v.adjoint_mode == AdjointMode::reversed_time ? "reversed_time" : "immersed_forward";
    inv["immersed_eps"] = fmt(v.immersed_eps);
    inv["inertia_sign"] = v.inertia_sign == InertiaSign::descent ? "descent" : "literal";

    auto& geo = out["geometry"];
    geo["init"] = format_circles(cfg.initial);
    geo["target"] = format_circles(cfg.target);

    auto& o = out["output"];
    o["dir"] = cfg.output_dir.string();
    o["snapshot_stride"] = std::to_string(cfg.snapshot_stride);
    o["theta_stride"] = std::to_string(cfg.theta_stride);

    auto& run = out["run"];
    run["seed"] = std::to_string(cfg.seed);
    run["gradcheck_directions"] = std::to_string(cfg.gradcheck_directions);
    run["gradcheck_step"] = fmt(cfg.gradcheck_step);
    run["profile_tau_min"] = fmt(cfg.profile_tau_min);
    run["profile_tau_max"] = fmt(cfg.profile_tau_max);
    run["profile_points"] = std::to_string(cfg.profile_points);
    return out;
}

LevelSet layout_level_set(const Mesh& mesh, const std::vector<Circle>& circles) {
    if (circles.empty()) return LevelSet{ScalarField{std::vector<double>(mesh.nodes().size(), 1.0)}};
    return level_set_from_circles(mesh, circles);
}

}  // namespace elastinv

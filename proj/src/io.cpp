#include "elastinv/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace elastinv {

namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ',')) out.push_back(cell);
    return out;
}

double parse_cell(const std::string& s, const std::string& where) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0) throw std::runtime_error(where + ": not a number '" + s + "'");
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.8e", v);
    return buf;
}

void write_boundary_csv(const std::filesystem::path& path, const BoundaryRecord& rec) {
    auto out = open_out(path);
    out << "t";
    for (double x : rec.gamma_x) out << ',' << format_double(x);
    out << '\n';
    for (std::size_t n = 0; n < rec.n_frames; ++n) {
        out << format_double(static_cast<double>(n) * rec.h);
        for (double v : rec.row(n)) out << ',' << format_double(v);
        out << '\n';
    }
}

BoundaryRecord load_boundary_csv(const std::filesystem::path& path, const Mesh& mesh, const SimConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open boundary data " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
    const auto header = split(line);
    if (header.empty() || header[0] != "t") throw std::runtime_error(path.string() + ": header must start with 't'");

    BoundaryRecord rec;
    rec.gamma_nodes = boundary_nodes(mesh, Side::Top);
    for (int i : rec.gamma_nodes) rec.gamma_x.push_back(mesh.nodes()[i].x);
    if (header.size() - 1 != rec.width())
        throw std::runtime_error(path.string() + ": " + std::to_string(header.size() - 1) +
                                 " boundary columns, mesh has " + std::to_string(rec.width()) + " top nodes");
    const double tol = 1e-6 * std::max(1.0 / static_cast<double>(rec.width()), 1e-12);
    for (std::size_t j = 0; j < rec.width(); ++j) {
        const double x = parse_cell(header[j + 1], path.string() + " header");
        if (std::abs(x - rec.gamma_x[j]) > tol)
            throw std::runtime_error(path.string() + ": column " + std::to_string(j) + " at x=" + header[j + 1] +
                                     " does not match the mesh");
    }

    std::vector<double> times;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split(line);
        const std::string where = path.string() + " line " + std::to_string(lineno);
        if (cells.size() != header.size()) throw std::runtime_error(where + ": wrong number of columns");
        times.push_back(parse_cell(cells[0], where));
        for (std::size_t j = 1; j < cells.size(); ++j) rec.values.push_back(parse_cell(cells[j], where));
    }
    rec.n_frames = times.size();
    if (rec.n_frames != static_cast<std::size_t>(cfg.n_steps) + 1)
        throw std::runtime_error(path.string() + ": " + std::to_string(rec.n_frames) + " frames, config expects " +
                                 std::to_string(cfg.n_steps + 1));
    rec.h = cfg.h;
    for (std::size_t n = 0; n < times.size(); ++n) {
        if (std::abs(times[n] - static_cast<double>(n) * cfg.h) > 1e-6 * cfg.h * std::max<double>(1.0, n))
            throw std::runtime_error(path.string() + ": time column does not match sim.h");
    }
    return rec;
}

void write_nodal_csv(const std::filesystem::path& path, const Mesh& mesh, const ScalarField& field,
                     const std::string& name) {
    check_size(mesh, field, name);
    auto out = open_out(path);
    out << "x,y," << name << '\n';
    for (std::size_t i = 0; i < mesh.nodes().size(); ++i)
        out << format_double(mesh.nodes()[i].x) << ',' << format_double(mesh.nodes()[i].y) << ','
            << format_double(field[i]) << '\n';
}

void write_history_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& history) {
    auto out = open_out(path);
    out << "iter,cost,centroid_x,centroid_y,area,tau_accepted\n";
    for (const auto& r : history)
        out << r.iter << ',' << format_double(r.cost) << ',' << format_double(r.centroid.x) << ','
            << format_double(r.centroid.y) << ',' << format_double(r.area) << ',' << format_double(r.tau_accepted)
            << '\n';
}

void write_profile_csv(const std::filesystem::path& path, const std::vector<std::pair<double, double>>& profile) {
    auto out = open_out(path);
    out << "tau,cost\n";
    for (const auto& [tau, c] : profile) out << format_double(tau) << ',' << format_double(c) << '\n';
}

void write_gradcheck_csv(const std::filesystem::path& path, const std::vector<GradientCheck>& rows) {
    auto out = open_out(path);
    out << "direction,analytic,numeric,rel_error\n";
    for (std::size_t k = 0; k < rows.size(); ++k)
        out << k << ',' << format_double(rows[k].analytic) << ',' << format_double(rows[k].numeric) << ','
            << format_double(rows[k].rel_error) << '\n';
}

void write_ppm(const std::filesystem::path& path, const Mesh& mesh, const std::vector<double>& cell_values,
               int pixels) {
    if (cell_values.size() != mesh.triangles().size())
        throw std::invalid_argument("write_ppm: one value per triangle expected");
    if (pixels < 1) throw std::invalid_argument("write_ppm: pixels must be positive");
    std::vector<unsigned char> img(static_cast<std::size_t>(pixels) * pixels, 0);

    for (std::size_t t = 0; t < mesh.triangles().size(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const Vec2 a = mesh.nodes()[tri[0]], b = mesh.nodes()[tri[1]], c = mesh.nodes()[tri[2]];
        const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
        const double v = std::clamp(cell_values[t], -1.0, 1.0);
        const auto grey = static_cast<unsigned char>(std::lround(127.5 * (v + 1.0)));

        const int i0 = std::max(0, static_cast<int>(std::floor(std::min({a.x, b.x, c.x}) * pixels)));
        const int i1 = std::min(pixels - 1, static_cast<int>(std::ceil(std::max({a.x, b.x, c.x}) * pixels)));
        const int j0 = std::max(0, static_cast<int>(std::floor(std::min({a.y, b.y, c.y}) * pixels)));
        const int j1 = std::min(pixels - 1, static_cast<int>(std::ceil(std::max({a.y, b.y, c.y}) * pixels)));
        for (int j = j0; j <= j1; ++j) {
            for (int i = i0; i <= i1; ++i) {
                const double px = (i + 0.5) / pixels, py = (j + 0.5) / pixels;
                const double l1 = ((b.x - px) * (c.y - py) - (c.x - px) * (b.y - py)) / det;
                const double l2 = ((c.x - px) * (a.y - py) - (a.x - px) * (c.y - py)) / det;
                const double l3 = 1.0 - l1 - l2;
                if (l1 < -1e-12 || l2 < -1e-12 || l3 < -1e-12) continue;
                // Image rows run top to bottom.
                img[static_cast<std::size_t>(pixels - 1 - j) * pixels + i] = grey;
            }
        }
    }
    auto out = open_out(path, true);
    out << "P5\n" << pixels << ' ' << pixels << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
}

}  // namespace elastinv

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "elastinv/inverse.hpp"
#include "elastinv/levelset.hpp"
#include "elastinv/mesh.hpp"
#include "elastinv/wave.hpp"

namespace elastinv {

/// Scientific notation with 9 significant digits.
std::string format_double(double v);

/// Header "t,x_0,...,x_m" (x of each gamma node), then one row per frame.
void write_boundary_csv(const std::filesystem::path& path, const BoundaryRecord& rec);

/// Reads a boundary CSV and binds its columns to the Top nodes of `mesh`.
/// Throws std::runtime_error if the columns, frame count or time step do not
/// match `mesh` and `cfg`.
BoundaryRecord load_boundary_csv(const std::filesystem::path& path, const Mesh& mesh, const SimConfig& cfg);

void write_nodal_csv(const std::filesystem::path& path, const Mesh& mesh, const ScalarField& field,
                     const std::string& name);
void write_history_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& history);
void write_profile_csv(const std::filesystem::path& path, const std::vector<std::pair<double, double>>& profile);
void write_gradcheck_csv(const std::filesystem::path& path, const std::vector<GradientCheck>& rows);

/// 8-bit greyscale PGM-style P5 raster of a per-triangle field on [-1, 1] (black -1, white +1).
void write_ppm(const std::filesystem::path& path, const Mesh& mesh, const std::vector<double>& cell_values,
               int pixels = 256);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace elastinv

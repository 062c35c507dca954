#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "elastinv/inverse.hpp"
#include "elastinv/levelset.hpp"
#include "elastinv/material.hpp"
#include "elastinv/mesh.hpp"
#include "elastinv/wave.hpp"

namespace elastinv {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat sectioned key/value text: "[section]" headers, "key = value" lines,
/// '#' or ';' comments.
using IniData = std::map<std::string, std::map<std::string, std::string>>;
IniData parse_ini(const std::string& text);

struct RunConfig {
    // [mesh]
    int n_divisions = 20;
    std::filesystem::path mesh_file;

    // [material]
    Phase phase1{180e9, 0.26, 4e3};
    Phase phase2{70e9, 0.25, 8e3};
    double eps = 0.05;

    ForceParams force;
    SimConfig sim;
    InverseConfig inverse;

    // [geometry]
    std::vector<Circle> initial{{{0.5, 0.5}, 0.1, false}};
    std::vector<Circle> target;

    // [output]
    std::filesystem::path output_dir = "out";
    int snapshot_stride = 10;  ///< dilation snapshot every k steps; 0 disables
    int theta_stride = 1;      ///< theta snapshot every k outer iterations; 0 keeps the final one only

    // [run]
    unsigned seed = 1;
    int gradcheck_directions = 5;
    double gradcheck_step = 1e-3;  ///< s relative to max|theta|
    double profile_tau_min = -0.01;
    double profile_tau_max = 0.01;
    int profile_points = 21;

    void validate() const;

    Mesh build_mesh() const;
    MaterialModel material() const { return MaterialModel(phase1, phase2, eps); }
    std::vector<double> profile_taus() const;
};

/// Parses "add x y r; sub x y r; ..." (an empty string gives no circles).
std::vector<Circle> parse_circles(const std::string& text);
std::string format_circles(const std::vector<Circle>& circles);

/// Mesh files are resolved relative to `base_dir`. Unknown sections or keys are errors.
RunConfig config_from_ini(const IniData& ini, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Every resolved setting as section -> key -> value text.
IniData config_to_ini(const RunConfig& cfg);

/// Level set of a circle layout; an empty layout is all phase 1 (theta = 1).
LevelSet layout_level_set(const Mesh& mesh, const std::vector<Circle>& circles);

}  // namespace elastinv

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "tilescope/substitution.hpp"

namespace tilescope {

inline constexpr int kSchemaVersion = 1;

// Per-system defaults for the analysis commands; every field may be
// overridden on the command line.
struct AnalysisDefaults {
    unsigned levels = 3;          // fixed-point depth, in units of the seed period N
    unsigned flc_levels = 5;
    double flc_radius = 2.5;
    double flc_epsilon = 1e-6;
    unsigned return_level = 2;
    double return_radius = 3.0;
    double period_window = 0;     // 0: derived from the patch
    double resolution = 0;        // raster cell side; 0: diam/256
    unsigned ifs_iters = 0;       // 0: until the Hausdorff step drops below h
    unsigned m = 2;
    unsigned cylinder_level = 4;
    unsigned nmax = 30;
    unsigned freq_levels = 5;
    std::vector<std::string> eigen_candidates;
    std::vector<std::string> mixing_z;
};

struct SystemConfig {
    SubstitutionSystem system;
    AnalysisDefaults analysis;
    std::string source_path;
};

SystemConfig parse_config(const nlohmann::json& j);
SystemConfig load_config(const std::string& path);
nlohmann::json serialize_config(const SystemConfig& cfg);

// directory holding the bundled systems
std::string bundled_config_dir();
SystemConfig load_bundled(const std::string& name);

}  // namespace tilescope

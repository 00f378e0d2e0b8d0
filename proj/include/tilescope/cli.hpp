#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "tilescope/config.hpp"
#include "tilescope/report.hpp"

namespace tilescope {

// a path, or the name of a bundled system ("kenyon")
SystemConfig resolve_config(const std::string& arg);

// "<system>_<artifact>[_<params>].<ext>" with unsafe characters replaced
std::string artifact_name(const std::string& system, const std::string& artifact, const std::string& params,
                          const std::string& ext);

// "1:0,0;1:0,1" -> patch (1-based types)
Patch parse_patch_spec(const SubstitutionSystem& sys, const std::string& spec);

struct PipelineResult {
    json report;
    int exit_code = 0;  // first failing block's code, 0 when all succeeded
};

// the full analysis; artifacts go to out_dir
PipelineResult run_pipeline(const SystemConfig& cfg, const std::string& out_dir);

// argv-style entry point; returns the process exit code
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tilescope

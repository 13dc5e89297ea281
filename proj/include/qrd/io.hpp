#pragma once

#include <optional>
#include <string>

#include "qrd/flow.hpp"

namespace qrd {

// A side of the problem: a flat domain, or a surface given as a conformal
// density over the canonical disk.
struct SideSpec {
    DomainSpec domain;
    std::optional<SurfaceSpec> surface;  // absent = flat (unit density)
};

struct RunConfig {
    SideSpec source, target;
    int n = 64;
    FlowConfig flow;
    std::string outdir = "out";
    std::string run_id;  // derived from the config when empty
    int snapshot_every = 0;
    unsigned long long seed = 0;

    static RunConfig from_json_file(const std::string& path);
    static RunConfig from_json_text(const std::string& text);
    std::string canonical_json() const;
};

struct RunArtifacts {
    std::string dir;
    std::string meta_path, trace_path;
    std::vector<std::string> snapshot_paths;
    std::string render_path;
    FlowStatus status = FlowStatus::MaxSteps;
    double distance = 0.0;  // final k_integral
    EnergyReport final_energies;
    double interior_res = 0.0, boundary_res = 0.0;
    int accepted_steps = 0;
};

DomainSpec domain_from_json_text(const std::string& text);

// snapshot files: CSV `i,j,x,y,phi1,phi2`, 17 significant digits
void write_snapshot(const DiffeoMap& phi, const std::string& path);
DiffeoMap read_snapshot(const std::string& path, const Chart& source, const Chart& target);

void render_svg(const DiffeoMap& phi, const std::string& out_path);

// build charts + densities for one side
struct SideBuild {
    Chart chart;
    ConformalDensity density;
};
SideBuild build_side(const SideSpec& side, int n);

RunArtifacts run_distance_pipeline(const RunConfig& config);

// `qrd init`: charts + initial map only, snapshot written
RunArtifacts run_init(const RunConfig& config);

// `qrd flow`: like the distance pipeline but resumable from a snapshot
RunArtifacts run_flow_cli(const RunConfig& config, const std::string& resume_snapshot);

}  // namespace qrd

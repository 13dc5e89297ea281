#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "qrd/io.hpp"

namespace {

int exit_code_for(const qrd::Error& e) {
    using K = qrd::ErrorKind;
    switch (e.kind()) {
        case K::AreaMismatch:
        case K::BadConfig:
        case K::UnsupportedDomain:
        case K::DegenerateBoundary:
        case K::NonPositiveDensity:
        case K::BadGridFile:
        case K::BadSnapshot:
        case K::IoError:
            return 3;
        default:
            return 4;  // solver failure
    }
}

int status_code(qrd::FlowStatus s) {
    switch (s) {
        case qrd::FlowStatus::ConvergedResidual:
        case qrd::FlowStatus::Stationary:
            return 0;
        case qrd::FlowStatus::MaxSteps:
            return 2;
    }
    return 2;
}

void print_report(const qrd::RunArtifacts& art) {
    const char* status = art.status == qrd::FlowStatus::ConvergedResidual ? "converged"
                         : art.status == qrd::FlowStatus::Stationary     ? "stationary"
                                                                         : "max_steps";
    std::printf("status: %s\n", status);
    std::printf("distance (k_integral): %.12g\n", art.distance);
    std::printf("e_dirichlet: %.12g  e_quad: %.12g  det_drift: %.3g\n",
                art.final_energies.e_dirichlet, art.final_energies.e_quad,
                art.final_energies.det_drift);
    std::printf("residuals: interior %.3g, boundary %.3g\n", art.interior_res,
                art.boundary_res);
    std::printf("run dir: %s\n", art.dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"incompressible quasi-rigid deformation solver"};
    app.require_subcommand(1);

    std::string config_path, snapshot_path, out_path, resume_path;

    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON run configuration")->required();
    };

    CLI::App* init = app.add_subcommand("init", "build the feasible initial map");
    add_config(init);

    CLI::App* flow = app.add_subcommand("flow", "run the descent flow");
    add_config(flow);
    flow->add_option("--resume", resume_path, "resume from a snapshot CSV");

    CLI::App* distance = app.add_subcommand("distance", "full deformation-distance pipeline");
    add_config(distance);

    CLI::App* energy = app.add_subcommand("energy", "energies of a snapshot map");
    add_config(energy);
    energy->add_option("--snapshot", snapshot_path, "snapshot CSV")->required();

    CLI::App* render = app.add_subcommand("render", "render a snapshot map to SVG");
    add_config(render);
    render->add_option("--snapshot", snapshot_path, "snapshot CSV")->required();
    render->add_option("--out", out_path, "output SVG path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        qrd::RunConfig cfg = qrd::RunConfig::from_json_file(config_path);
        if (init->parsed()) {
            qrd::RunArtifacts art = qrd::run_init(cfg);
            print_report(art);
            return 0;
        }
        if (flow->parsed() || distance->parsed()) {
            qrd::RunArtifacts art = qrd::run_flow_cli(cfg, resume_path);
            print_report(art);
            return status_code(art.status);
        }
        qrd::SideBuild src = qrd::build_side(cfg.source, cfg.n);
        qrd::SideBuild tgt = qrd::build_side(cfg.target, cfg.n);
        qrd::DiffeoMap phi = qrd::read_snapshot(snapshot_path, src.chart, tgt.chart);
        if (energy->parsed()) {
            qrd::EnergyReport rep =
                qrd::energies(phi, qrd::pullback(tgt.density, phi), src.density.as_field());
            std::printf("e_dirichlet,e_quad,k_integral,det_drift\n");
            std::printf("%.17g,%.17g,%.17g,%.17g\n", rep.e_dirichlet, rep.e_quad,
                        rep.k_integral, rep.det_drift);
            return 0;
        }
        qrd::render_svg(phi, out_path);
        std::printf("wrote %s\n", out_path.c_str());
        return 0;
    } catch (const qrd::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
}

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"

using namespace qt;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing and validation") {
    RunConfig c = RunConfig::from_json_text(R"({
        "source": {"type":"disk","radius":1.0},
        "target": {"type":"disk","radius":1.0,"rotation":0.5,"center":[0.2,0.0]},
        "n": 16, "max_steps": 5, "outdir": "/tmp/qrd_io_test"
    })");
    CHECK(c.n == 16);
    CHECK(c.target.domain.rotation == 0.5);
    CHECK(c.flow.cfl_max == 0.5);

    CHECK_THROWS_AS(RunConfig::from_json_text("{not json"), Error);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({"source":{"type":"disk"}})"), Error);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({
        "source": {"type":"annulus"}, "target": {"type":"disk"}})"),
                    Error);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({
        "source": {"type":"disk"}, "target": {"type":"disk"}, "n": 4})"),
                    Error);
    CHECK_THROWS_AS(RunConfig::from_json_text(R"({
        "source": {"type":"disk"}, "target": {"type":"disk"}, "dt_min": -1})"),
                    Error);
}

TEST_CASE("surface sides build disk charts with densities") {
    RunConfig c = RunConfig::from_json_text(R"({
        "source": {"type":"sphere_patch","radius":1.0,"disk_radius":1.0},
        "target": {"type":"sphere_patch","radius":1.0,"disk_radius":1.0},
        "n": 16
    })");
    SideBuild side = build_side(c.source, c.n);
    CHECK(side.chart.spec.type == DomainSpec::Type::Disk);
    CHECK(side.density.provenance == ConformalDensity::Provenance::SpherePatch);
}

TEST_CASE("snapshot round trip is lossless") {
    Chart d = disk_chart(24);
    std::mt19937_64 rng(5);
    DiffeoMap phi = random_ap_map(d, rng, 2);
    std::string path = "/tmp/qrd_snap_test.csv";
    write_snapshot(phi, path);
    DiffeoMap back = read_snapshot(path, d, d);
    for (std::size_t k = 0; k < d.size(); ++k) {
        CHECK(back.values[k].x == phi.values[k].x);  // %.17g round-trips doubles
        CHECK(back.values[k].y == phi.values[k].y);
    }
    ScalarField unit = unit_field(d);
    EnergyReport a = energies(phi, unit, unit);
    EnergyReport b = energies(back, unit, unit);
    CHECK(a.e_dirichlet == doctest::Approx(b.e_dirichlet).epsilon(1e-14));

    // truncated file
    std::string text = slurp(path);
    std::ofstream out("/tmp/qrd_snap_trunc.csv");
    out << text.substr(0, text.size() / 2);
    out.close();
    CHECK_THROWS_AS(read_snapshot("/tmp/qrd_snap_trunc.csv", d, d), Error);

    std::ofstream bad("/tmp/qrd_snap_bad.csv");
    bad << "wrong,header\n";
    bad.close();
    try {
        read_snapshot("/tmp/qrd_snap_bad.csv", d, d);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BadSnapshot);
    }
}

TEST_CASE("render: identity and shear maps produce well-formed SVG") {
    Chart d = disk_chart(24);
    DiffeoMap id = identity_map(d);
    render_svg(id, "/tmp/qrd_id.svg");
    std::string svg = slurp("/tmp/qrd_id.svg");
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("<svg xmlns=") != std::string::npos);

    Chart sq = square_chart(16);
    DiffeoMap shear = map_from(sq, sq, [](double x, double y) { return Vec2{x + 0.5 * y, y}; });
    render_svg(shear, "/tmp/qrd_shear.svg");
    std::string s2 = slurp("/tmp/qrd_shear.svg");
    // affine map: constant defect, hence one fill color for every cell
    std::string first_fill;
    std::size_t pos = 0, fills = 0;
    while ((pos = s2.find("fill=\"#", pos)) != std::string::npos) {
        std::string c = s2.substr(pos + 6, 9);
        if (first_fill.empty()) first_fill = c;
        CHECK(c == first_fill);
        ++fills;
        pos += 7;
    }
    CHECK(fills > 100);
}

TEST_CASE("distance pipeline: disk to the same disk") {
    RunConfig c = RunConfig::from_json_text(R"({
        "source": {"type":"disk","radius":1.0},
        "target": {"type":"disk","radius":1.0},
        "n": 24, "outdir": "/tmp/qrd_pipe_same", "run_id": "same"
    })");
    RunArtifacts art = run_distance_pipeline(c);
    CHECK(art.status == FlowStatus::ConvergedResidual);
    CHECK(std::abs(art.distance) <= 1e-6);
    CHECK(art.accepted_steps == 0);
    CHECK(fs::exists(art.dir + "/meta.json"));
    CHECK(fs::exists(art.trace_path));
    CHECK(fs::exists(art.render_path));
    std::string meta = slurp(art.dir + "/meta.json");
    CHECK(meta.find("\"status\": \"converged\"") != std::string::npos);
}

TEST_CASE("distance pipeline: rotated disk is rigid from the start") {
    RunConfig c = RunConfig::from_json_text(R"({
        "source": {"type":"disk","radius":1.0},
        "target": {"type":"disk","radius":1.0,"rotation":0.9,"center":[0.4,-0.1]},
        "n": 32, "outdir": "/tmp/qrd_pipe_rigid", "run_id": "rigid"
    })");
    RunArtifacts art = run_distance_pipeline(c);
    CHECK(art.status == FlowStatus::ConvergedResidual);
    CHECK(std::abs(art.distance) <= 1e-6);
    CHECK(art.accepted_steps == 0);
}

TEST_CASE("pipeline failure leaves meta.json with the error") {
    RunConfig c = RunConfig::from_json_text(R"({
        "source": {"type":"disk","radius":1.0},
        "target": {"type":"disk","radius":1.2},
        "n": 16, "outdir": "/tmp/qrd_pipe_fail", "run_id": "fail"
    })");
    CHECK_THROWS_AS(run_distance_pipeline(c), Error);
    std::string meta = slurp("/tmp/qrd_pipe_fail/fail/meta.json");
    CHECK(meta.find("\"status\": \"error\"") != std::string::npos);
    CHECK(meta.find("area") != std::string::npos);
}

TEST_CASE("trace determinism: identical configs give identical traces") {
    const char* cfg = R"({
        "source": {"type":"disk","radius":1.0},
        "target": {"type":"star","coeffs":[%A%, 0, 0, 0.05]},
        "n": 16, "max_steps": 8, "outdir": "/tmp/qrd_pipe_det", "run_id": "%ID%"
    })";
    auto make = [&](const std::string& id) {
        std::string text = cfg;
        // star with a0 chosen so the area equals pi: pi (a0^2 + 0.5 c^2) = pi
        double a0 = std::sqrt(1.0 - 0.5 * 0.05 * 0.05);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", a0);
        text.replace(text.find("%A%"), 3, buf);
        text.replace(text.find("%ID%"), 4, id);
        return RunConfig::from_json_text(text);
    };
    RunArtifacts a = run_distance_pipeline(make("a"));
    RunArtifacts b = run_distance_pipeline(make("b"));
    std::string ta = slurp(a.trace_path), tb = slurp(b.trace_path);
    CHECK(ta == tb);
    CHECK(!ta.empty());
}

TEST_CASE("init and resume round trip") {
    RunConfig c = RunConfig::from_json_text(R"({
        "source": {"type":"disk","radius":1.0},
        "target": {"type":"disk","radius":1.0},
        "n": 16, "max_steps": 3, "outdir": "/tmp/qrd_pipe_resume", "run_id": "r"
    })");
    RunArtifacts art = run_init(c);
    REQUIRE(!art.snapshot_paths.empty());
    RunArtifacts res = run_flow_cli(c, art.snapshot_paths.front());
    CHECK(res.status == FlowStatus::ConvergedResidual);
}

#include "qrd/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace qrd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "qrd 0.1.0";

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

DomainSpec parse_domain(const json& j) {
    DomainSpec d;
    std::string type = j.at("type").get<std::string>();
    if (type == "disk") {
        d.type = DomainSpec::Type::Disk;
        d.radius = j.value("radius", 1.0);
    } else if (type == "rect") {
        d.type = DomainSpec::Type::Rect;
        d.w = j.at("w").get<double>();
        d.h = j.at("h").get<double>();
    } else if (type == "star") {
        d.type = DomainSpec::Type::Star;
        d.coeffs = j.at("coeffs").get<std::vector<double>>();
    } else {
        throw Error(ErrorKind::UnsupportedDomain,
                    "unsupported domain type '" + type + "' (need disk, rect, or star)");
    }
    if (j.contains("center")) {
        auto c = j.at("center").get<std::vector<double>>();
        if (c.size() != 2) throw Error(ErrorKind::BadConfig, "center needs two numbers");
        d.center = {c[0], c[1]};
        d.has_center = true;
    }
    d.rotation = j.value("rotation", 0.0);
    return d;
}

SideSpec parse_side(const json& j) {
    SideSpec side;
    std::string type = j.at("type").get<std::string>();
    if (type == "disk" || type == "rect" || type == "star") {
        side.domain = parse_domain(j);
        return side;
    }
    SurfaceSpec s;
    if (type == "flat") {
        s.type = SurfaceSpec::Type::Flat;
        s.scale = j.value("scale", 1.0);
        side.domain.type = DomainSpec::Type::Disk;
        side.domain.radius = 1.0;
    } else if (type == "sphere_patch") {
        s.type = SurfaceSpec::Type::SpherePatch;
        s.radius = j.value("radius", 1.0);
        s.disk_radius = j.value("disk_radius", 1.0);
        side.domain.type = DomainSpec::Type::Disk;
        side.domain.radius = s.disk_radius;
    } else if (type == "grid_file") {
        s.type = SurfaceSpec::Type::GridFile;
        s.path = j.at("path").get<std::string>();
        side.domain.type = DomainSpec::Type::Disk;
        side.domain.radius = j.value("disk_radius", 1.0);
    } else {
        throw Error(ErrorKind::UnsupportedDomain, "unsupported side type '" + type + "'");
    }
    side.surface = s;
    return side;
}

json side_to_json(const SideSpec& side) {
    json j;
    if (side.surface) {
        const SurfaceSpec& s = *side.surface;
        switch (s.type) {
            case SurfaceSpec::Type::Flat:
                j["type"] = "flat";
                j["scale"] = s.scale;
                break;
            case SurfaceSpec::Type::SpherePatch:
                j["type"] = "sphere_patch";
                j["radius"] = s.radius;
                j["disk_radius"] = s.disk_radius;
                break;
            case SurfaceSpec::Type::GridFile:
                j["type"] = "grid_file";
                j["path"] = s.path;
                j["disk_radius"] = side.domain.radius;
                break;
        }
        return j;
    }
    const DomainSpec& d = side.domain;
    switch (d.type) {
        case DomainSpec::Type::Disk:
            j["type"] = "disk";
            j["radius"] = d.radius;
            break;
        case DomainSpec::Type::Rect:
            j["type"] = "rect";
            j["w"] = d.w;
            j["h"] = d.h;
            break;
        case DomainSpec::Type::Star:
            j["type"] = "star";
            j["coeffs"] = d.coeffs;
            break;
    }
    if (d.has_center) j["center"] = {d.center.x, d.center.y};
    if (d.rotation != 0.0) j["rotation"] = d.rotation;
    return j;
}

std::string fnv1a_hex(const std::string& s) {
    unsigned long long h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", h);
    return buf;
}

const char* status_name(FlowStatus s) {
    switch (s) {
        case FlowStatus::ConvergedResidual: return "converged";
        case FlowStatus::Stationary: return "stationary";
        case FlowStatus::MaxSteps: return "max_steps";
    }
    return "unknown";
}

}  // namespace

DomainSpec domain_from_json_text(const std::string& text) {
    return parse_domain(json::parse(text));
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::BadConfig, std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    try {
        c.source = parse_side(j.at("source"));
        c.target = parse_side(j.at("target"));
        c.n = j.value("n", 64);
        c.flow.dt0 = j.value("dt0", 0.0);
        c.flow.dt_min = j.value("dt_min", 1e-9);
        c.flow.dt_max = j.value("dt_max", 1e6);
        c.flow.cfl_max = j.value("cfl_max", 0.5);
        c.flow.tol_interior = j.value("tol_interior", 0.0);
        c.flow.tol_boundary = j.value("tol_boundary", 0.0);
        c.flow.reproject_threshold = j.value("reproject_threshold", 5e-3);
        c.flow.moser_tol = j.value("moser_tol", 1e-3);
        c.flow.max_steps = j.value("max_steps", 2000);
        c.outdir = j.value("outdir", std::string("out"));
        c.run_id = j.value("run_id", std::string());
        c.snapshot_every = j.value("snapshot_every", 0);
        c.seed = j.value("seed", 0ull);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::BadConfig, std::string("bad config: ") + e.what());
    }
    if (c.n < 8) throw Error(ErrorKind::BadConfig, "n must be >= 8");
    if (c.flow.dt_min <= 0 || c.flow.dt_max < c.flow.dt_min)
        throw Error(ErrorKind::BadConfig, "need 0 < dt_min <= dt_max");
    if (c.flow.dt0 != 0.0 && (c.flow.dt0 < c.flow.dt_min || c.flow.dt0 > c.flow.dt_max))
        throw Error(ErrorKind::BadConfig, "need dt_min <= dt0 <= dt_max");
    if (c.flow.cfl_max <= 0 || c.flow.reproject_threshold <= 0 || c.flow.moser_tol <= 0 ||
        c.flow.tol_interior < 0 || c.flow.tol_boundary < 0)
        throw Error(ErrorKind::BadConfig, "tolerances must be positive");
    if (c.flow.max_steps < 0) throw Error(ErrorKind::BadConfig, "max_steps must be >= 0");
    return c;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string RunConfig::canonical_json() const {
    json j;
    j["source"] = side_to_json(source);
    j["target"] = side_to_json(target);
    j["n"] = n;
    j["dt0"] = flow.dt0;
    j["dt_min"] = flow.dt_min;
    j["dt_max"] = flow.dt_max;
    j["cfl_max"] = flow.cfl_max;
    j["tol_interior"] = flow.tol_interior;
    j["tol_boundary"] = flow.tol_boundary;
    j["reproject_threshold"] = flow.reproject_threshold;
    j["moser_tol"] = flow.moser_tol;
    j["max_steps"] = flow.max_steps;
    j["outdir"] = outdir;
    j["snapshot_every"] = snapshot_every;
    j["seed"] = seed;
    return j.dump();
}

void write_snapshot(const DiffeoMap& phi, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write snapshot " + path);
    out << "i,j,x,y,phi1,phi2\n";
    const Chart& ch = *phi.source;
    for (int i = 0; i < ch.nu; ++i)
        for (int j = 0; j < ch.nv; ++j) {
            int id = ch.idx(i, j);
            out << i << ',' << j << ',' << fmt17(ch.nodes[id].x) << ','
                << fmt17(ch.nodes[id].y) << ',' << fmt17(phi.values[id].x) << ','
                << fmt17(phi.values[id].y) << '\n';
        }
    if (!out) throw Error(ErrorKind::IoError, "snapshot write failed: " + path);
}

DiffeoMap read_snapshot(const std::string& path, const Chart& source, const Chart& target) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::BadSnapshot, "cannot open snapshot " + path);
    std::string header;
    if (!std::getline(in, header) || header != "i,j,x,y,phi1,phi2")
        throw Error(ErrorKind::BadSnapshot, "snapshot header mismatch in " + path);
    DiffeoMap phi(source, target);
    std::vector<char> seen(source.size(), 0);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        int i, j;
        double x, y, p1, p2;
        if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf,%lf", &i, &j, &x, &y, &p1, &p2) != 6)
            throw Error(ErrorKind::BadSnapshot, "snapshot row malformed in " + path);
        if (i < 0 || i >= source.nu || j < 0 || j >= source.nv)
            throw Error(ErrorKind::BadSnapshot, "snapshot index outside chart in " + path);
        int id = source.idx(i, j);
        phi.values[id] = {p1, p2};
        seen[id] = 1;
        ++rows;
    }
    if (rows != source.size())
        throw Error(ErrorKind::BadSnapshot, "snapshot row count does not match the chart");
    for (char s : seen)
        if (!s) throw Error(ErrorKind::BadSnapshot, "snapshot misses grid nodes");
    return phi;
}

void render_svg(const DiffeoMap& phi, const std::string& out_path) {
    const Chart& src = *phi.source;
    const Chart& tgt = *phi.target;
    GramHopf gh = gram_and_hopf(phi);

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    auto grow = [&](Vec2 p) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    };
    for (const Vec2& p : phi.values) grow(p);
    for (const auto& b : src.boundary) grow(b.pos);
    for (const auto& b : tgt.boundary) grow(b.pos);
    double pad = 0.05 * std::max(xmax - xmin, ymax - ymin);
    xmin -= pad; xmax += pad; ymin -= pad; ymax += pad;
    double W = 800.0, H = 800.0 * (ymax - ymin) / (xmax - xmin);
    auto X = [&](double x) { return (x - xmin) / (xmax - xmin) * W; };
    auto Y = [&](double y) { return H - (y - ymin) / (ymax - ymin) * H; };

    // per-cell color: pointwise isometry defect k = tr^2 - 4 det = |f|^2,
    // log10 scale clamped to [-12, 1]
    const double klo = -12.0, khi = 1.0;
    auto color = [&](double k) {
        double t = (std::log10(std::max(k, 1e-300)) - klo) / (khi - klo);
        t = std::min(1.0, std::max(0.0, t));
        int r = int(255 * t);
        int g = int(64 * (1.0 - t) + 32);
        int b = int(255 * (1.0 - t));
        char buf[16];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
        return std::string(buf);
    };

    std::ofstream out(out_path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write SVG " + out_path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<!-- deformed grid under the computed map; cells filled by the pointwise\n"
           "     isometry defect k = tr^2(|DPhi|^2) - 4 det^2(DPhi) = |f|^2 on a\n"
           "     log10 color scale from 1e-12 (blue) to 1e1 (red); every 4th grid\n"
           "     line drawn; source boundary dashed, target boundary solid -->\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << W << ' ' << H
        << "\">\n";

    int jcells = src.periodic_t() ? src.nv : src.nv - 1;
    for (int i = 0; i + 1 < src.nu; ++i)
        for (int j = 0; j < jcells; ++j) {
            int j2 = (j + 1) % src.nv;
            Vec2 a = phi.values[src.idx(i, j)], b = phi.values[src.idx(i + 1, j)];
            Vec2 c = phi.values[src.idx(i + 1, j2)], d = phi.values[src.idx(i, j2)];
            double k = 0.0;
            for (int id : {src.idx(i, j), src.idx(i + 1, j), src.idx(i + 1, j2), src.idx(i, j2)}) {
                double df = gh.g22.v[id] - gh.g11.v[id];
                k += (df * df + 4.0 * gh.g12.v[id] * gh.g12.v[id]) / 4.0;
            }
            out << "<polygon points=\"" << X(a.x) << ',' << Y(a.y) << ' ' << X(b.x) << ','
                << Y(b.y) << ' ' << X(c.x) << ',' << Y(c.y) << ' ' << X(d.x) << ',' << Y(d.y)
                << "\" fill=\"" << color(k) << "\" stroke=\"none\"/>\n";
        }

    auto polyline = [&](auto&& next, int count, const char* style) {
        out << "<polyline fill=\"none\" " << style << " points=\"";
        for (int k = 0; k < count; ++k) {
            Vec2 p = next(k);
            out << X(p.x) << ',' << Y(p.y) << ' ';
        }
        out << "\"/>\n";
    };
    const char* grid_style = "stroke=\"#333333\" stroke-width=\"0.6\"";
    for (int i = 0; i < src.nu; i += 4)
        polyline([&](int k) { return phi.values[src.idx(i, k % src.nv)]; },
                 src.periodic_t() ? src.nv + 1 : src.nv, grid_style);
    for (int j = 0; j < src.nv; j += 4)
        polyline([&](int k) { return phi.values[src.idx(k, j)]; }, src.nu, grid_style);

    polyline([&](int k) { return src.boundary[k % src.boundary.size()].pos; },
             int(src.boundary.size()) + 1,
             "stroke=\"#008800\" stroke-width=\"1.2\" stroke-dasharray=\"6,4\"");
    polyline([&](int k) { return tgt.boundary[k % tgt.boundary.size()].pos; },
             int(tgt.boundary.size()) + 1, "stroke=\"#000000\" stroke-width=\"1.2\"");
    out << "</svg>\n";
    if (!out) throw Error(ErrorKind::IoError, "SVG write failed: " + out_path);
}

SideBuild build_side(const SideSpec& side, int n) {
    Chart chart = build_chart(side.domain, n);
    SideBuild out{std::move(chart), {}};
    if (side.surface)
        out.density = density_from_spec(*side.surface, out.chart);
    else
        out.density = unit_density(out.chart);
    return out;
}

namespace {

struct PipelineFiles {
    fs::path dir;
    std::ofstream trace;
    std::string trace_path;
};

PipelineFiles open_run_dir(const RunConfig& cfg, bool with_trace) {
    PipelineFiles pf;
    std::string id = cfg.run_id.empty() ? fnv1a_hex(cfg.canonical_json()) : cfg.run_id;
    pf.dir = fs::path(cfg.outdir) / id;
    std::error_code ec;
    fs::create_directories(pf.dir, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + pf.dir.string());
    if (with_trace) {
        pf.trace_path = (pf.dir / "trace.csv").string();
        pf.trace.open(pf.trace_path);
        if (!pf.trace) throw Error(ErrorKind::IoError, "cannot write " + pf.trace_path);
        pf.trace << "step,t,e_dirichlet,e_quad,k_integral,det_drift,interior_res,"
                    "boundary_res,dt,accepted\n";
        pf.trace.flush();
    }
    return pf;
}

void write_meta(const fs::path& dir, const RunConfig& cfg, const RunArtifacts& art,
                const std::string& error_msg) {
    json j;
    j["version"] = kVersion;
    j["config"] = json::parse(cfg.canonical_json());
    j["status"] = error_msg.empty() ? status_name(art.status) : "error";
    if (!error_msg.empty()) j["error"] = error_msg;
    j["distance"] = art.distance;
    j["final"] = {{"e_dirichlet", art.final_energies.e_dirichlet},
                  {"e_quad", art.final_energies.e_quad},
                  {"k_integral", art.final_energies.k_integral},
                  {"det_drift", art.final_energies.det_drift},
                  {"interior_res", art.interior_res},
                  {"boundary_res", art.boundary_res}};
    j["accepted_steps"] = art.accepted_steps;
    j["files"] = json::object();
    if (!art.trace_path.empty()) j["files"]["trace"] = art.trace_path;
    if (!art.render_path.empty()) j["files"]["render"] = art.render_path;
    j["files"]["snapshots"] = art.snapshot_paths;
    std::ofstream out(dir / "meta.json");
    out << j.dump(2) << "\n";
}

}  // namespace

RunArtifacts run_distance_pipeline(const RunConfig& config) {
    return run_flow_cli(config, "");
}

RunArtifacts run_flow_cli(const RunConfig& config, const std::string& resume_snapshot) {
    PipelineFiles pf = open_run_dir(config, true);
    RunArtifacts art;
    art.dir = pf.dir.string();
    art.trace_path = pf.trace_path;
    try {
        SideBuild src = build_side(config.source, config.n);
        SideBuild tgt = build_side(config.target, config.n);
        FlowDriver driver(src.chart, tgt.density, src.density, config.flow);

        DiffeoMap initial =
            resume_snapshot.empty()
                ? build_initial_map(src.chart, tgt.chart, tgt.density, src.density,
                                    config.flow.moser_tol, driver.poisson())
                : read_snapshot(resume_snapshot, src.chart, tgt.chart);

        std::string init_path = (pf.dir / "init_map.csv").string();
        write_snapshot(initial, init_path);
        art.snapshot_paths.push_back(init_path);

        auto emit = [&](const TraceRow& r) {
            pf.trace << r.step << ',' << fmt17(r.t) << ',' << fmt17(r.e_dirichlet) << ','
                     << fmt17(r.e_quad) << ',' << fmt17(r.k_integral) << ','
                     << fmt17(r.det_drift) << ',' << fmt17(r.interior_res) << ','
                     << fmt17(r.boundary_res) << ',' << fmt17(r.dt) << ',' << r.accepted
                     << '\n';
            pf.trace.flush();
        };
        auto on_accept = [&](const FlowState& s) {
            if (config.snapshot_every > 0 && s.step_index % config.snapshot_every == 0) {
                std::string p =
                    (pf.dir / ("map_" + std::to_string(s.step_index) + ".csv")).string();
                write_snapshot(s.phi, p);
                art.snapshot_paths.push_back(p);
            }
        };
        FlowResult res = run_flow(driver, initial, emit, on_accept);

        art.status = res.status;
        art.accepted_steps = res.trace.rows.empty() ? 0 : res.trace.rows.back().step;
        art.interior_res = res.interior_res;
        art.boundary_res = res.boundary_res;
        art.final_energies =
            energies(res.map, pullback(tgt.density, res.map), src.density.as_field());
        art.distance = art.final_energies.k_integral;

        std::string final_path = (pf.dir / "final_map.csv").string();
        write_snapshot(res.map, final_path);
        art.snapshot_paths.push_back(final_path);
        art.render_path = (pf.dir / "final.svg").string();
        render_svg(res.map, art.render_path);
        write_meta(pf.dir, config, art, "");
        return art;
    } catch (const Error& e) {
        write_meta(pf.dir, config, art, e.what());
        throw;
    }
}

RunArtifacts run_init(const RunConfig& config) {
    PipelineFiles pf = open_run_dir(config, false);
    RunArtifacts art;
    art.dir = pf.dir.string();
    try {
        SideBuild src = build_side(config.source, config.n);
        SideBuild tgt = build_side(config.target, config.n);
        NeumannPoisson poisson(src.chart);
        DiffeoMap initial = build_initial_map(src.chart, tgt.chart, tgt.density, src.density,
                                              config.flow.moser_tol, poisson);
        std::string p = (pf.dir / "init_map.csv").string();
        write_snapshot(initial, p);
        art.snapshot_paths.push_back(p);
        art.final_energies = energies(initial, pullback(tgt.density, initial),
                                      src.density.as_field());
        art.distance = art.final_energies.k_integral;
        art.status = FlowStatus::ConvergedResidual;
        write_meta(pf.dir, config, art, "");
        return art;
    } catch (const Error& e) {
        write_meta(pf.dir, config, art, e.what());
        throw;
    }
}

}  // namespace qrd

#include "qrd/density.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace qrd {

ConformalDensity density_from_spec(const SurfaceSpec& spec, const Chart& chart) {
    ConformalDensity d;
    d.chart = &chart;
    d.values.resize(chart.size());
    switch (spec.type) {
        case SurfaceSpec::Type::Flat: {
            if (spec.scale <= 0)
                throw Error(ErrorKind::NonPositiveDensity, "flat density scale must be > 0");
            double c = spec.scale;
            d.provenance = ConformalDensity::Provenance::Flat;
            d.closure = [c](Vec2) { return c; };
            for (auto& v : d.values) v = c;
            break;
        }
        case SurfaceSpec::Type::SpherePatch: {
            if (spec.radius <= 0 || spec.disk_radius <= 0)
                throw Error(ErrorKind::NonPositiveDensity, "sphere patch radii must be > 0");
            // stereographic factor on the chart disk, pinned to the chart's
            // own center: the patch covers |z| <= disk_radius
            double R = spec.radius;
            Vec2 c = chart.spec.center;
            d.provenance = ConformalDensity::Provenance::SpherePatch;
            d.closure = [R, c](Vec2 p) {
                double r2 = (p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y);
                double den = 1.0 + r2;
                return 4.0 * R * R / (den * den);
            };
            for (std::size_t id = 0; id < chart.size(); ++id)
                d.values[id] = d.closure(chart.nodes[id]);
            break;
        }
        case SurfaceSpec::Type::GridFile: {
            std::ifstream in(spec.path);
            if (!in) throw Error(ErrorKind::BadGridFile, "cannot open grid file " + spec.path);
            d.provenance = ConformalDensity::Provenance::GridFile;
            std::size_t count = 0;
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                std::stringstream ss(line);
                std::string cell;
                while (std::getline(ss, cell, ',')) {
                    if (count >= d.values.size())
                        throw Error(ErrorKind::BadGridFile, "grid file larger than chart");
                    d.values[count++] = std::stod(cell);
                }
            }
            if (count != d.values.size())
                throw Error(ErrorKind::BadGridFile, "grid file shape mismatch");
            for (double v : d.values)
                if (!(v > 0.0))
                    throw Error(ErrorKind::NonPositiveDensity, "grid density must be > 0");
            break;
        }
    }
    switch (spec.type) {
        case SurfaceSpec::Type::Flat:
            d.mass = spec.scale * chart.spec.analytic_area();
            break;
        case SurfaceSpec::Type::SpherePatch:
            if (chart.spec.type == DomainSpec::Type::Disk) {
                double R = spec.radius, rho = chart.spec.radius;
                d.mass = 4.0 * M_PI * R * R * rho * rho / (1.0 + rho * rho);
            } else {
                d.mass = weighted_area(d);
            }
            break;
        case SurfaceSpec::Type::GridFile:
            d.mass = weighted_area(d);
            break;
    }
    return d;
}

ScalarField pullback(const ConformalDensity& mu, const DiffeoMap& phi) {
    ScalarField out(*phi.source);
    if (mu.closure) {
        for (std::size_t id = 0; id < out.v.size(); ++id)
            out.v[id] = mu.closure(phi.values[id]);
        return out;
    }
    ScalarField grid = mu.as_field();
    for (std::size_t id = 0; id < out.v.size(); ++id)
        out.v[id] = interp_sample(grid, phi.values[id]);
    return out;
}

double weighted_area(const ConformalDensity& mu) {
    double acc = 0.0;
    for (std::size_t id = 0; id < mu.values.size(); ++id)
        acc += mu.values[id] * mu.chart->area_weights[id];
    return acc;
}

double weighted_area_analytic(const SurfaceSpec& spec, const Chart& chart) {
    if (spec.type == SurfaceSpec::Type::Flat)
        return spec.scale * chart.spec.analytic_area();
    if (spec.type == SurfaceSpec::Type::SpherePatch &&
        chart.spec.type == DomainSpec::Type::Disk) {
        double R = spec.radius, rho = chart.spec.radius;
        return 4.0 * M_PI * R * R * rho * rho / (1.0 + rho * rho);
    }
    ConformalDensity d = density_from_spec(spec, chart);
    return weighted_area(d);
}

ConformalDensity unit_density(const Chart& chart) {
    SurfaceSpec s;
    s.type = SurfaceSpec::Type::Flat;
    s.scale = 1.0;
    return density_from_spec(s, chart);
}

}  // namespace qrd

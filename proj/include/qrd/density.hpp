#pragma once

#include <functional>
#include <optional>
#include <string>

#include "qrd/deformation.hpp"
#include "qrd/field.hpp"

namespace qrd {

struct SurfaceSpec {
    enum class Type { Flat, SpherePatch, GridFile };
    Type type = Type::Flat;
    double scale = 1.0;        // Flat: mu == scale
    double radius = 1.0;       // SpherePatch: sphere radius R
    double disk_radius = 1.0;  // SpherePatch: chart disk radius
    std::string path;          // GridFile: CSV of positive values
};

// Positive conformal factor mu on a chart; surfaces enter the solver only
// through these densities.
struct ConformalDensity {
    enum class Provenance { Flat, SpherePatch, GridFile };
    const Chart* chart = nullptr;
    std::vector<double> values;
    Provenance provenance = Provenance::Flat;
    std::function<double(Vec2)> closure;  // exact off-node evaluation, if any
    double mass = 0.0;  // |Sigma| = int mu; analytic when the closure admits it

    ScalarField as_field() const {
        ScalarField f(*chart);
        f.v = values;
        return f;
    }
};

ConformalDensity density_from_spec(const SurfaceSpec& spec, const Chart& chart);

// mu evaluated at the image points of phi (analytic closure when present)
ScalarField pullback(const ConformalDensity& mu, const DiffeoMap& phi);

// |Sigma| = int mu dxdy under the adopted area convention
double weighted_area(const ConformalDensity& mu);

// analytic weighted area when the closure admits one (Flat, SpherePatch on
// a full disk chart); falls back to quadrature otherwise
double weighted_area_analytic(const SurfaceSpec& spec, const Chart& chart);

ConformalDensity unit_density(const Chart& chart);

}  // namespace qrd

#pragma once

#include "qrd/field.hpp"
#include "qrd/ops.hpp"

namespace qrd {

// Grid-sampled map from a source chart into a target chart.
struct DiffeoMap {
    const Chart* source = nullptr;
    const Chart* target = nullptr;
    std::vector<Vec2> values;  // image point per source node

    DiffeoMap() = default;
    DiffeoMap(const Chart& src, const Chart& tgt)
        : source(&src), target(&tgt), values(src.size()) {}

    Vec2& operator()(int i, int j) { return values[source->idx(i, j)]; }
    Vec2 operator()(int i, int j) const { return values[source->idx(i, j)]; }
};

DiffeoMap identity_map(const Chart& chart);

// image of the map at an off-node point (component-wise interpolation)
Vec2 interp_map(const DiffeoMap& phi, Vec2 p);

struct MapJacobian {
    ScalarField dx1, dy1, dx2, dy2;  // partials of the two components
    ScalarField det;
};

MapJacobian jacobian_fields(const DiffeoMap& phi);

struct GramHopf {
    ScalarField g11, g12, g22;  // pullback Gram matrix entries
    ComplexField f;             // Hopf field (g22 - g11) + 2i g12
};

GramHopf gram_and_hopf(const DiffeoMap& phi);

struct EnergyReport {
    double e_dirichlet = 0.0;  // int mu^2(phi) tr(G)
    double e_quad = 0.0;       // int mu^2(phi) tr^2(G)
    double k_integral = 0.0;   // int [mu^2(phi) tr^2(G) - 4 eta^2]
    double det_drift = 0.0;    // max |mu(phi) det Dphi - eta|
};

EnergyReport energies(const DiffeoMap& phi, const ScalarField& mu_pullback,
                      const ScalarField& eta);

ScalarField membership_residual(const DiffeoMap& phi, const ScalarField& mu_pullback,
                                const ScalarField& eta);

// true of every interior/boundary node image (within tol of the target)
bool images_inside_target(const DiffeoMap& phi, double tol);

}  // namespace qrd

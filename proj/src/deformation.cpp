#include "qrd/deformation.hpp"

#include <cmath>

namespace qrd {

DiffeoMap identity_map(const Chart& chart) {
    DiffeoMap phi(chart, chart);
    phi.values = chart.nodes;
    return phi;
}

Vec2 interp_map(const DiffeoMap& phi, Vec2 p) {
    const Chart& ch = *phi.source;
    ScalarField c1(ch), c2(ch);
    for (std::size_t id = 0; id < phi.values.size(); ++id) {
        c1.v[id] = phi.values[id].x;
        c2.v[id] = phi.values[id].y;
    }
    return {interp_sample(c1, p), interp_sample(c2, p)};
}

MapJacobian jacobian_fields(const DiffeoMap& phi) {
    const Chart& ch = *phi.source;
    ScalarField c1(ch), c2(ch);
    for (std::size_t id = 0; id < phi.values.size(); ++id) {
        c1.v[id] = phi.values[id].x;
        c2.v[id] = phi.values[id].y;
    }
    auto [dx1, dy1] = grad_xy(c1);
    auto [dx2, dy2] = grad_xy(c2);
    MapJacobian out{std::move(dx1), std::move(dy1), std::move(dx2), std::move(dy2),
                    ScalarField(ch)};
    for (std::size_t id = 0; id < out.det.v.size(); ++id)
        out.det.v[id] =
            out.dx1.v[id] * out.dy2.v[id] - out.dy1.v[id] * out.dx2.v[id];
    return out;
}

GramHopf gram_and_hopf(const DiffeoMap& phi) {
    MapJacobian J = jacobian_fields(phi);
    const Chart& ch = *phi.source;
    GramHopf out{ScalarField(ch), ScalarField(ch), ScalarField(ch), ComplexField(ch)};
    for (std::size_t id = 0; id < ch.size(); ++id) {
        double px1 = J.dx1.v[id], px2 = J.dx2.v[id];
        double py1 = J.dy1.v[id], py2 = J.dy2.v[id];
        double g11 = px1 * px1 + px2 * px2;
        double g22 = py1 * py1 + py2 * py2;
        double g12 = px1 * py1 + px2 * py2;
        out.g11.v[id] = g11;
        out.g12.v[id] = g12;
        out.g22.v[id] = g22;
        out.f.v[id] = cplx(g22 - g11, 2.0 * g12);
    }
    return out;
}

EnergyReport energies(const DiffeoMap& phi, const ScalarField& mu_pullback,
                      const ScalarField& eta) {
    MapJacobian J = jacobian_fields(phi);
    const Chart& ch = *phi.source;
    EnergyReport rep;
    for (std::size_t id = 0; id < ch.size(); ++id) {
        double px1 = J.dx1.v[id], px2 = J.dx2.v[id];
        double py1 = J.dy1.v[id], py2 = J.dy2.v[id];
        double tr = px1 * px1 + px2 * px2 + py1 * py1 + py2 * py2;
        double mu = mu_pullback.v[id], et = eta.v[id];
        double w = ch.area_weights[id];
        rep.e_dirichlet += mu * mu * tr * w;
        rep.e_quad += mu * mu * tr * tr * w;
        rep.k_integral += (mu * mu * tr * tr - 4.0 * et * et) * w;
        rep.det_drift = std::max(rep.det_drift, std::abs(mu * J.det.v[id] - et));
    }
    return rep;
}

ScalarField membership_residual(const DiffeoMap& phi, const ScalarField& mu_pullback,
                                const ScalarField& eta) {
    MapJacobian J = jacobian_fields(phi);
    ScalarField out(*phi.source);
    for (std::size_t id = 0; id < out.v.size(); ++id)
        out.v[id] = mu_pullback.v[id] * J.det.v[id] - eta.v[id];
    return out;
}

bool images_inside_target(const DiffeoMap& phi, double tol) {
    for (const Vec2& p : phi.values)
        if (!phi.target->inside(p, tol)) return false;
    return true;
}

}  // namespace qrd

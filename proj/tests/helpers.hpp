#pragma once

#include <cmath>
#include <functional>
#include <random>

#include "qrd/deformation.hpp"
#include "qrd/density.hpp"
#include "qrd/flow.hpp"
#include "qrd/io.hpp"
#include "qrd/moser.hpp"
#include "qrd/ops.hpp"
#include "qrd/stream.hpp"

namespace qt {

using namespace qrd;

inline Chart disk_chart(int n, double R = 1.0) {
    DomainSpec d;
    d.type = DomainSpec::Type::Disk;
    d.radius = R;
    return build_chart(d, n);
}

inline Chart square_chart(int n, double w = 1.0, double h = 1.0, bool centered = false) {
    DomainSpec d;
    d.type = DomainSpec::Type::Rect;
    d.w = w;
    d.h = h;
    if (centered) {
        d.has_center = true;
        d.center = {0.0, 0.0};
    }
    return build_chart(d, n);
}

inline ScalarField sample_scalar(const Chart& ch, const std::function<double(double, double)>& f) {
    ScalarField out(ch);
    for (std::size_t id = 0; id < ch.size(); ++id)
        out.v[id] = f(ch.nodes[id].x, ch.nodes[id].y);
    return out;
}

inline ComplexField sample_complex(const Chart& ch,
                                   const std::function<cplx(double, double)>& f) {
    ComplexField out(ch);
    for (std::size_t id = 0; id < ch.size(); ++id)
        out.v[id] = f(ch.nodes[id].x, ch.nodes[id].y);
    return out;
}

inline DiffeoMap map_from(const Chart& src, const Chart& tgt,
                          const std::function<Vec2(double, double)>& f) {
    DiffeoMap phi(src, tgt);
    for (std::size_t id = 0; id < src.size(); ++id)
        phi.values[id] = f(src.nodes[id].x, src.nodes[id].y);
    return phi;
}

template <class F>
double max_err(const F& field, const std::function<typename decltype(field.v)::value_type(
                                   double, double)>& exact) {
    double m = 0.0;
    for (std::size_t id = 0; id < field.chart->size(); ++id) {
        auto p = field.chart->nodes[id];
        m = std::max(m, std::abs(field.v[id] - exact(p.x, p.y)));
    }
    return m;
}

inline double max_abs_field(const ScalarField& f) {
    double m = 0.0;
    for (double v : f.v) m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs_field(const ComplexField& f) {
    double m = 0.0;
    for (const cplx& v : f.v) m = std::max(m, std::abs(v));
    return m;
}

inline double ip_area(const ScalarField& a, const ScalarField& b) {
    double acc = 0.0;
    for (std::size_t id = 0; id < a.v.size(); ++id)
        acc += a.v[id] * b.v[id] * a.chart->area_weights[id];
    return acc;
}

inline double l2_area(const ScalarField& a) { return std::sqrt(ip_area(a, a)); }

// velocity field of a given stream function, v = i dzbar(psi)
inline ComplexField velocity_of(const ScalarField& psi) {
    ComplexField d = wirtinger(psi, Wirtinger::d_zbar);
    for (auto& v : d.v) v *= cplx(0, 1);
    return d;
}

// Randomized area-preserving-ish initialization: advect the identity along a
// few random polynomial stream flows (each exactly tangent, divergence-free
// up to stencil error), then Moser-correct the accumulated drift away.
inline DiffeoMap random_ap_map(const Chart& disk, std::mt19937_64& rng, int nflows = 4,
                               double amp = 0.35, const NeumannPoisson* poisson = nullptr) {
    std::normal_distribution<double> g(0.0, 1.0);
    DiffeoMap phi = identity_map(disk);
    for (int k = 0; k < nflows; ++k) {
        double a[6];
        for (double& x : a) x = g(rng);
        ScalarField psi = sample_scalar(disk, [&](double x, double y) {
            double r2 = x * x + y * y;
            double bump = (1.0 - r2) * (1.0 - r2);
            return bump * (a[0] + a[1] * x + a[2] * y + a[3] * x * y + a[4] * x * x +
                           a[5] * y * y);
        });
        double m = max_abs_field(psi);
        if (m == 0.0) continue;
        for (auto& v : psi.v) v *= amp / m;
        ComplexField vel = velocity_of(psi);
        double vmax = max_abs_field(vel);
        double dt = 0.45 * disk.h_cfl / vmax;
        for (int s = 0; s < 3; ++s) phi = advect(phi, vel, dt);
    }
    if (poisson) {
        ConformalDensity unit = unit_density(disk);
        phi = reproject(phi, unit, unit.as_field(), 1e-3, *poisson);
    }
    return phi;
}

inline double dirichlet_energy(const DiffeoMap& phi) {
    ScalarField unit(*phi.source, 1.0);
    return energies(phi, unit, unit).e_dirichlet;
}

// centered finite-difference rate oracle for e_dirichlet under advect(+-dt)
inline double fd_rate(const DiffeoMap& phi, const ComplexField& velocity, double dt,
                      const ScalarField& mu_pb_src, const ConformalDensity* mu = nullptr) {
    DiffeoMap plus = advect(phi, velocity, dt, 1e18);
    DiffeoMap minus = advect(phi, velocity, -dt, 1e18);
    ScalarField unit(*phi.source, 1.0);
    const ScalarField& eta = unit;
    ScalarField mup = mu ? pullback(*mu, plus) : unit;
    ScalarField mum = mu ? pullback(*mu, minus) : unit;
    double ep = energies(plus, mup, eta).e_dirichlet;
    double em = energies(minus, mum, eta).e_dirichlet;
    return (ep - em) / (2.0 * dt);
}

}  // namespace qt

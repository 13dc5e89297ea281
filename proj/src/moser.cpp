#include "qrd/moser.hpp"

#include <cmath>

#include "qrd/ops.hpp"

namespace qrd {

DiffeoMap base_map(const Chart& src, const Chart& tgt) {
    DiffeoMap phi(src, tgt);
    if (src.kind == tgt.kind) {
        // reference-coordinate identification
        for (int i = 0; i < src.nu; ++i)
            for (int j = 0; j < src.nv; ++j)
                phi(i, j) = tgt.to_physical(src.s_of(i), src.t_of(j));
        return phi;
    }
    // mixed chart kinds: identify rays about the centers (both domains are
    // star shaped, so this is a continuous orientation-preserving bijection)
    for (std::size_t id = 0; id < src.size(); ++id) {
        double s, th;
        src.to_radial(src.nodes[id], s, th);
        phi.values[id] = tgt.radial_point(s, th);
    }
    return phi;
}

MoserProblem make_moser_problem(const DiffeoMap& base, const ConformalDensity& mu,
                                const ScalarField& eta) {
    MoserProblem p;
    p.src = base.source;
    p.tgt = base.target;
    p.base = base;
    p.eta = eta;
    ScalarField mu_pb = pullback(mu, base);
    MapJacobian J = jacobian_fields(base);
    p.rho = ScalarField(*base.source);
    double mass_eta = integrate_area(eta), mass_rho = 0.0;
    for (std::size_t id = 0; id < p.rho.v.size(); ++id) {
        p.rho.v[id] = mu_pb.v[id] * J.det.v[id];
        mass_rho += p.rho.v[id] * base.source->area_weights[id];
    }
    for (double v : p.rho.v)
        if (!(v > 0.0))
            throw Error(ErrorKind::SolverDiverged,
                        "base map pullback density is not positive");
    double scale = mass_eta / mass_rho;
    for (auto& v : p.rho.v) v *= scale;
    return p;
}

namespace {

// advance positions through the density-interpolation flow w_s = -grad u / rho_s
void flow_positions(const Chart& ch, const ScalarField& ux, const ScalarField& uy,
                    const ScalarField& rho, const ScalarField& eta, std::vector<Vec2>& pos) {
    double maxg = 0.0, minden = 1e300;
    for (std::size_t id = 0; id < ch.size(); ++id) {
        maxg = std::max(maxg, std::hypot(ux.v[id], uy.v[id]));
        minden = std::min(minden, std::min(rho.v[id], eta.v[id]));
    }
    if (maxg == 0.0) return;
    double wmax = maxg / minden;
    int nsub = std::max(2, int(std::ceil(wmax / (0.5 * ch.h_cfl))));
    double dsig = 1.0 / nsub;

    auto vel = [&](Vec2 p, double s, Vec2& out) {
        double gx = interp_sample(ux, p), gy = interp_sample(uy, p);
        double den = (1.0 - s) * interp_sample(eta, p) + s * interp_sample(rho, p);
        out = {-gx / den, -gy / den};
    };
    auto clamp_src = [&](Vec2 p) {
        double s, t;
        if (ch.to_reference(p, s, t, ch.clamp_tol)) return ch.to_physical(s, t);
        throw Error(ErrorKind::PointOutsideDomain, "Moser flow left the source domain");
    };
    double s = 0.0;
    for (int step = 0; step < nsub; ++step) {
        for (auto& p : pos) {
            Vec2 k1, k2, k3, k4;
            vel(p, s, k1);
            vel(clamp_src(p + 0.5 * dsig * k1), s + 0.5 * dsig, k2);
            vel(clamp_src(p + 0.5 * dsig * k2), s + 0.5 * dsig, k3);
            vel(clamp_src(p + dsig * k3), s + dsig, k4);
            p = clamp_src(p + (dsig / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        }
        s += dsig;
    }
}

double residual_of(const DiffeoMap& phi, const ConformalDensity& mu, const ScalarField& eta) {
    ScalarField mu_pb = pullback(mu, phi);
    ScalarField res = membership_residual(phi, mu_pb, eta);
    double m = 0.0;
    for (double v : res.v) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

DiffeoMap moser_correct(const MoserProblem& problem, double tol, const NeumannPoisson& poisson,
                        const ConformalDensity& mu, int max_passes) {
    const Chart& ch = *problem.src;
    DiffeoMap phi = problem.base;
    ScalarField rho = problem.rho;
    double res = residual_of(phi, mu, problem.eta);
    double mass_eta = integrate_area(problem.eta);

    for (int pass = 0; pass < max_passes && res > tol; ++pass) {
        ScalarField rhs(ch);
        for (std::size_t id = 0; id < ch.size(); ++id)
            rhs.v[id] = rho.v[id] - problem.eta.v[id];
        ScalarField u = poisson.solve(rhs);
        auto [ux, uy] = grad_xy(u);

        std::vector<Vec2> pos = ch.nodes;
        flow_positions(ch, ux, uy, rho, problem.eta, pos);

        // compose: phi <- phi o T
        ScalarField c1(ch), c2(ch);
        for (std::size_t id = 0; id < ch.size(); ++id) {
            c1.v[id] = phi.values[id].x;
            c2.v[id] = phi.values[id].y;
        }
        ScalarField o1(ch), o2(ch);
        for (std::size_t id = 0; id < ch.size(); ++id) {
            o1.v[id] = interp_sample(c1, pos[id]);
            o2.v[id] = interp_sample(c2, pos[id]);
        }
        pole_repair(o1);
        pole_repair(o2);
        DiffeoMap next(ch, *problem.tgt);
        for (std::size_t id = 0; id < ch.size(); ++id)
            next.values[id] = {o1.v[id], o2.v[id]};

        double next_res = residual_of(next, mu, problem.eta);
        if (next_res >= res) break;  // stalled at the discretization floor
        phi = std::move(next);
        res = next_res;
        if (res <= tol) break;

        // rebuild the pullback density for another pass
        ScalarField mu_pb = pullback(mu, phi);
        MapJacobian J = jacobian_fields(phi);
        double mass_rho = 0.0;
        for (std::size_t id = 0; id < ch.size(); ++id) {
            rho.v[id] = mu_pb.v[id] * J.det.v[id];
            mass_rho += rho.v[id] * ch.area_weights[id];
        }
        double scale = mass_eta / mass_rho;
        for (auto& v : rho.v) v *= scale;
    }
    if (res > tol)
        throw tolerance_not_met("Moser correction stalled above tolerance", res);
    return phi;
}

DiffeoMap build_initial_map(const Chart& src, const Chart& tgt, const ConformalDensity& mu,
                            const ConformalDensity& eta_density, double tol,
                            const NeumannPoisson& poisson) {
    ScalarField eta = eta_density.as_field();
    double a_src = eta_density.mass, a_tgt = mu.mass;
    if (std::abs(a_src - a_tgt) > 1e-6 * std::max(std::abs(a_src), std::abs(a_tgt)))
        throw Error(ErrorKind::AreaMismatch,
                    "source and target (weighted) areas differ beyond 1e-6 relative");

    DiffeoMap base = base_map(src, tgt);
    if (residual_of(base, mu, eta) <= tol) return base;
    MoserProblem p = make_moser_problem(base, mu, eta);
    return moser_correct(p, tol, poisson, mu);
}

}  // namespace qrd

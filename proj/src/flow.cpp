#include "qrd/flow.hpp"

#include <cmath>

#include "qrd/ops.hpp"

namespace qrd {

namespace {

double max_abs(const ComplexField& f) {
    double m = 0.0;
    for (const cplx& v : f.v) m = std::max(m, std::abs(v));
    return m;
}

double max_abs(const ScalarField& f) {
    double m = 0.0;
    for (double v : f.v) m = std::max(m, std::abs(v));
    return m;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

TraceRow row_of(const FlowState& st, int accepted) {
    TraceRow r;
    r.step = st.step_index;
    r.t = st.t;
    r.e_dirichlet = st.last.e_dirichlet;
    r.e_quad = st.last.e_quad;
    r.k_integral = st.last.k_integral;
    r.det_drift = st.last.det_drift;
    r.interior_res = st.interior_res;
    r.boundary_res = st.boundary_res;
    r.dt = st.dt;
    r.accepted = accepted;
    return r;
}

}  // namespace

DiffeoMap advect(const DiffeoMap& phi, const ComplexField& velocity, double dt,
                 double cfl_max) {
    const Chart& src = *phi.source;
    const Chart& tgt = *phi.target;
    double vmax = max_abs(velocity);
    if (std::abs(dt) * vmax > cfl_max * src.h_cfl * (1.0 + 1e-9))
        throw Error(ErrorKind::CflViolation, "advection step exceeds the CFL bound");
    if (vmax == 0.0 || dt == 0.0) return phi;

    ScalarField vr(src), vi(src);
    for (std::size_t id = 0; id < src.size(); ++id) {
        vr.v[id] = velocity.v[id].real();
        vi.v[id] = velocity.v[id].imag();
    }
    int nsub = std::max(1, int(std::ceil(std::abs(dt) * vmax / (0.5 * src.h_cfl))));
    double tau = dt / nsub;

    auto clamp_src = [&](Vec2 p) {
        double s, t;
        if (!src.to_reference(p, s, t, src.clamp_tol))
            throw Error(ErrorKind::PointOutsideDomain,
                        "characteristic left the source domain: velocity not tangent");
        return src.to_physical(s, t);
    };
    auto vel = [&](Vec2 p) -> Vec2 { return {interp_sample(vr, p), interp_sample(vi, p)}; };

    std::vector<Vec2> pos = src.nodes;
    for (int step = 0; step < nsub; ++step) {
        for (auto& p : pos) {
            Vec2 k1 = vel(p);
            Vec2 k2 = vel(clamp_src(p + 0.5 * tau * k1));
            Vec2 k3 = vel(clamp_src(p + 0.5 * tau * k2));
            Vec2 k4 = vel(clamp_src(p + tau * k3));
            p = clamp_src(p + (tau / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        }
    }

    ScalarField c1(src), c2(src);
    for (std::size_t id = 0; id < src.size(); ++id) {
        c1.v[id] = phi.values[id].x;
        c2.v[id] = phi.values[id].y;
    }
    ScalarField o1(src), o2(src);
    for (std::size_t id = 0; id < src.size(); ++id) {
        o1.v[id] = interp_sample(c1, pos[id]);
        o2.v[id] = interp_sample(c2, pos[id]);
    }
    // characteristics crossing the polar core leave sub-cell angular
    // structure the chart cannot carry; rebuild the innermost rings
    pole_repair(o1);
    pole_repair(o2);
    DiffeoMap out(src, tgt);
    for (std::size_t id = 0; id < src.size(); ++id) {
        Vec2 img{o1.v[id], o2.v[id]};
        double s, t;
        if (!tgt.to_reference(img, s, t, 0.0)) {
            tgt.to_reference(img, s, t, 1e300);
            img = tgt.to_physical(s, t);
        }
        out.values[id] = img;
    }
    return out;
}

DiffeoMap reproject(const DiffeoMap& phi, const ConformalDensity& mu, const ScalarField& eta,
                    double tol, const NeumannPoisson& poisson) {
    MoserProblem p = make_moser_problem(phi, mu, eta);
    return moser_correct(p, tol, poisson, mu);
}

FlowDriver::FlowDriver(const Chart& src, const ConformalDensity& mu,
                       const ConformalDensity& eta, FlowConfig config)
    : src_(&src), mu_(&mu), eta_density_(&eta), eta_(eta.as_field()), cfg_(config) {}

const ClampedBiharmonic& FlowDriver::biharmonic() {
    if (!biharm_) biharm_ = std::make_unique<ClampedBiharmonic>(*src_);
    return *biharm_;
}

const NeumannPoisson& FlowDriver::poisson() {
    if (!poisson_) poisson_ = std::make_unique<NeumannPoisson>(*src_);
    return *poisson_;
}

void FlowDriver::residuals(const DiffeoMap& phi, double& interior, double& boundary) const {
    GramHopf gh = gram_and_hopf(phi);
    ScalarField mu_pb = pullback(*mu_, phi);
    interior = max_abs(psi0_descent(gh.f, mu_pb, eta_));
    boundary = max_abs(boundary_residual(gh.f, *src_));
}

FlowState FlowDriver::make_state(const DiffeoMap& initial) const {
    FlowState st;
    st.phi = initial;
    st.last = energies(initial, pullback(*mu_, initial), eta_);
    residuals(initial, st.interior_res, st.boundary_res);
    st.dt = cfg_.dt0;
    return st;
}

void FlowDriver::step(FlowState& state) {
    GramHopf gh = gram_and_hopf(state.phi);
    ScalarField mu_pb = pullback(*mu_, state.phi);
    StreamParts stream = assemble_stream(gh.f, mu_pb, eta_, biharmonic());
    state.interior_res = max_abs(stream.psi0);
    state.boundary_res = max_abs(boundary_residual(gh.f, *src_));

    double vmax = max_abs(stream.velocity);
    if (vmax <= 0.0)
        throw line_search_failed("velocity vanished below tolerance", state.interior_res,
                                 state.boundary_res);
    double cfl_dt = cfg_.cfl_max * src_->h_cfl / vmax;
    double dt_try = (state.dt > 0.0) ? std::min(state.dt * 1.2, cfl_dt) : cfl_dt;
    dt_try = std::min(dt_try, cfg_.dt_max);
    dt_try = std::max(dt_try, cfg_.dt_min);

    // demand a decrease that clears roundoff noise, so critical points report
    // stationarity instead of accepting junk steps
    const double decrease_floor = 1e-12 * std::max(1.0, std::abs(state.last.e_dirichlet));
    for (int attempt = 0; attempt <= 6; ++attempt) {
        DiffeoMap cand = advect(state.phi, stream.velocity, dt_try, cfg_.cfl_max);
        ScalarField cand_mu = pullback(*mu_, cand);
        EnergyReport rep = energies(cand, cand_mu, eta_);
        if (rep.det_drift > cfg_.reproject_threshold) {
            cand = reproject(cand, *mu_, eta_, cfg_.moser_tol, poisson());
            rep = energies(cand, pullback(*mu_, cand), eta_);
        }
        if (rep.e_dirichlet < state.last.e_dirichlet - decrease_floor) {
            state.phi = std::move(cand);
            state.last = rep;
            state.t += dt_try;
            state.dt = dt_try;
            ++state.step_index;
            return;
        }
        dt_try *= 0.5;
        if (dt_try < cfg_.dt_min) break;
    }
    throw line_search_failed("no energy decrease down to dt_min", state.interior_res,
                             state.boundary_res);
}

FlowResult run_flow(FlowDriver& driver, const DiffeoMap& initial, const TraceSink& sink,
                    const AcceptSink& on_accept) {
    const FlowConfig& config = driver.config();
    FlowState st = driver.make_state(initial);

    FlowResult out;
    out.tol_interior = config.tol_interior > 0.0
                           ? config.tol_interior
                           : std::max(1e-4 * st.interior_res, 1e-9);
    out.tol_boundary = config.tol_boundary > 0.0
                           ? config.tol_boundary
                           : std::max(1e-4 * st.boundary_res, 1e-9);

    auto emit = [&](const TraceRow& r) {
        out.trace.rows.push_back(r);
        if (sink) sink(r);
    };
    emit(row_of(st, 1));

    out.status = FlowStatus::MaxSteps;
    for (int k = 0; k < config.max_steps; ++k) {
        if (st.interior_res <= out.tol_interior && st.boundary_res <= out.tol_boundary) {
            out.status = FlowStatus::ConvergedResidual;
            break;
        }
        try {
            driver.step(st);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::LineSearchFailed) throw;
            st.interior_res = e.interior_res;
            st.boundary_res = e.boundary_res;
            emit(row_of(st, 0));
            out.status = FlowStatus::Stationary;
            break;
        }
        emit(row_of(st, 1));
        if (on_accept) on_accept(st);
    }
    if (out.status == FlowStatus::MaxSteps &&
        st.interior_res <= out.tol_interior && st.boundary_res <= out.tol_boundary)
        out.status = FlowStatus::ConvergedResidual;

    out.map = std::move(st.phi);
    out.interior_res = st.interior_res;
    out.boundary_res = st.boundary_res;
    return out;
}

FlowResult run_flow(const DiffeoMap& initial, const ConformalDensity& mu,
                    const ConformalDensity& eta, const FlowConfig& config,
                    const TraceSink& sink) {
    FlowDriver driver(*initial.source, mu, eta, config);
    return run_flow(driver, initial, sink);
}

}  // namespace qrd

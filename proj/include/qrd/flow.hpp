#pragma once

#include <functional>

#include "qrd/density.hpp"
#include "qrd/moser.hpp"
#include "qrd/stream.hpp"

namespace qrd {

struct FlowConfig {
    double dt0 = 0.0;      // 0 = start from the CFL bound
    double dt_min = 1e-9;
    double dt_max = 1e6;
    double cfl_max = 0.5;
    double tol_interior = 0.0;  // 0 = 1e-4 * initial residual (floored at 1e-9)
    double tol_boundary = 0.0;
    double reproject_threshold = 5e-3;
    double moser_tol = 1e-3;
    int max_steps = 2000;
};

struct TraceRow {
    int step = 0;
    double t = 0.0;
    double e_dirichlet = 0.0, e_quad = 0.0, k_integral = 0.0, det_drift = 0.0;
    double interior_res = 0.0, boundary_res = 0.0;
    double dt = 0.0;
    int accepted = 1;
};

struct FlowTrace {
    std::vector<TraceRow> rows;
};

enum class FlowStatus { ConvergedResidual, Stationary, MaxSteps };

struct FlowState {
    DiffeoMap phi;
    double t = 0.0;
    int step_index = 0;
    EnergyReport last;
    double interior_res = 0.0, boundary_res = 0.0;
    double dt = 0.0;
};

struct FlowResult {
    DiffeoMap map;
    FlowTrace trace;
    FlowStatus status = FlowStatus::MaxSteps;
    double interior_res = 0.0, boundary_res = 0.0;
    double tol_interior = 0.0, tol_boundary = 0.0;
};

// Right-composition semi-Lagrangian transport: Phi o S^dt, with the
// characteristics of the velocity field traced forward by RK4 and the map
// sampled at the endpoints. Requires dt * max|v| <= cfl_max * h.
DiffeoMap advect(const DiffeoMap& phi, const ComplexField& velocity, double dt,
                 double cfl_max = 0.5);

// restore the membership constraint degraded by discretization drift
DiffeoMap reproject(const DiffeoMap& phi, const ConformalDensity& mu, const ScalarField& eta,
                    double tol, const NeumannPoisson& poisson);

// Owns the per-chart solvers and advances one flow. The public step()
// performs stream assembly, a backtracking line search on e_dirichlet with up
// to six halvings, and triggers reprojection when det drift exceeds the
// threshold; it throws LineSearchFailed when no decrease exists at dt_min.
class FlowDriver {
public:
    FlowDriver(const Chart& src, const ConformalDensity& mu, const ConformalDensity& eta,
               FlowConfig config);

    FlowState make_state(const DiffeoMap& initial) const;
    void residuals(const DiffeoMap& phi, double& interior, double& boundary) const;
    void step(FlowState& state);

    const FlowConfig& config() const { return cfg_; }
    const ClampedBiharmonic& biharmonic();
    const NeumannPoisson& poisson();

private:
    const Chart* src_;
    const ConformalDensity* mu_;
    const ConformalDensity* eta_density_;
    ScalarField eta_;
    FlowConfig cfg_;
    // solvers built lazily: a run that starts at a critical point never
    // needs the factorizations
    std::unique_ptr<ClampedBiharmonic> biharm_;
    std::unique_ptr<NeumannPoisson> poisson_;
};

using TraceSink = std::function<void(const TraceRow&)>;
using AcceptSink = std::function<void(const FlowState&)>;

FlowResult run_flow(FlowDriver& driver, const DiffeoMap& initial, const TraceSink& sink = {},
                    const AcceptSink& on_accept = {});

FlowResult run_flow(const DiffeoMap& initial, const ConformalDensity& mu,
                    const ConformalDensity& eta, const FlowConfig& config,
                    const TraceSink& sink = {});

}  // namespace qrd

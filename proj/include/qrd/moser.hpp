#pragma once

#include "qrd/deformation.hpp"
#include "qrd/density.hpp"
#include "qrd/elliptic.hpp"

namespace qrd {

// chart-coordinate identification between two charts; a diffeomorphism but
// generally not area preserving
DiffeoMap base_map(const Chart& src, const Chart& tgt);

struct MoserProblem {
    const Chart* src = nullptr;
    const Chart* tgt = nullptr;
    ScalarField eta;      // density the corrected map must realize
    DiffeoMap base;       // starting diffeomorphism
    ScalarField rho;      // mu(base) det D(base), mass-normalized to eta
};

MoserProblem make_moser_problem(const DiffeoMap& base, const ConformalDensity& mu,
                                const ScalarField& eta);

// Correct the base map along the density-interpolation flow until the
// membership residual max|mu(phi) det Dphi - eta| drops below tol. Repeats
// the construction (it is idempotent up to tol) when one pass is not enough.
DiffeoMap moser_correct(const MoserProblem& problem, double tol,
                        const NeumannPoisson& poisson, const ConformalDensity& mu,
                        int max_passes = 6);

DiffeoMap build_initial_map(const Chart& src, const Chart& tgt, const ConformalDensity& mu,
                            const ConformalDensity& eta_density, double tol,
                            const NeumannPoisson& poisson);

}  // namespace qrd

#pragma once

#include "qrd/elliptic.hpp"
#include "qrd/field.hpp"

namespace qrd {

// Descent stream function psi = psi0 + psi1 + psi2 with its orthogonality
// multipliers and the induced tangent velocity v = i eta^{-1} dzbar(psi).
struct StreamParts {
    ScalarField psi0, psi1, psi2;
    double lambda1 = 0.0, lambda2 = 0.0;
    ScalarField psi_total;
    ComplexField velocity;
};

// Interior descent density. Flat (unit densities): -Im d2/dzbar2 f; weighted:
// -Im dzbar( eta^{-1} dzbar( mu^2(phi) f ) ). Unit densities reduce the
// weighted formula to the flat one exactly.
ScalarField psi0_descent(const ComplexField& f, const ScalarField& mu_pullback,
                         const ScalarField& eta);

// Im(f tau^2) per boundary sample (criticality condition (ii))
std::vector<double> boundary_residual(const ComplexField& f, const Chart& chart);

StreamParts assemble_stream(const ComplexField& f, const ScalarField& mu_pullback,
                            const ScalarField& eta, const ClampedBiharmonic& solver);

// dE/dt predicted for the given stream function: 2 Im int mu^2(phi) f
// dzbar(eta^{-1} dzbar psi) dxdy. The constant (2, not the 4 of the source
// derivation) is fixed by the finite-difference descent oracle for the
// velocity normalization v = i eta^{-1} dzbar psi.
double predicted_rate(const ComplexField& f, const StreamParts& stream,
                      const ScalarField& mu_pullback, const ScalarField& eta);

// frozen constants of the rate decomposition
// dE/dt = -kRateInterior int psi0^2 - kRateBoundary loop eta^{-1} mu^2 (Im f tau^2)^2
inline constexpr double kRateInterior = 2.0;
inline constexpr double kRateBoundary = 0.5;

}  // namespace qrd

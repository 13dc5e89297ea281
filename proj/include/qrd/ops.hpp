#pragma once

#include <span>
#include <utility>
#include <vector>

#include "qrd/field.hpp"

namespace qrd {

enum class Wirtinger { d_z, d_zbar };

// Physical-space gradient via chart jacobians. Reference stencils are
// centered 2nd order inside, one-sided 2nd order at the s-extremes; the
// periodic angular axis of polar charts uses high-order centered stencils
// (order 10 when the grid allows) so that rigid motions differentiate to
// roundoff.
std::pair<ScalarField, ScalarField> grad_xy(const ScalarField& f);
std::pair<ComplexField, ComplexField> grad_xy(const ComplexField& f);

ComplexField wirtinger(const ScalarField& f, Wirtinger which);
ComplexField wirtinger(const ComplexField& f, Wirtinger which);

double integrate_area(const ScalarField& f);
double integrate_boundary(const Chart& chart, std::span<const double> samples);

std::vector<cplx> boundary_tangent_sq(const Chart& chart);

// value of a field at the boundary samples
std::vector<double> boundary_trace(const ScalarField& f);
std::vector<cplx> boundary_trace(const ComplexField& f);

// outward normal derivative at the boundary samples
std::vector<double> normal_derivative(const ScalarField& f);

// Repair for fields produced by composing stencil derivatives of
// stencil-derived data (e.g. Im d2/dzbar2 of the Hopf field). The stencil
// switch between centered and one-sided rows leaves an O(1) error band at
// the chart edges (and at the polar core, where angular truncation is
// amplified by 1/r); the band is rebuilt from the clean interior by local
// polynomial fits. No-op on grids too small to carry the fit.
ScalarField cascade_repair(const ScalarField& f);

// Pole part of the repair alone, in place: rebuild the innermost rings of a
// polar chart from a local Cartesian fit (advected maps acquire sub-cell
// angular structure there that the chart cannot carry). No-op on rect charts
// and on grids too coarse for the fit.
void pole_repair(ScalarField& f);

// Bicubic-type interpolation in reference coordinates: 4-point Lagrange per
// axis (8-point on the periodic angular axis of polar charts; exact on
// bicubic polynomials either way). Points outside by less than the chart's
// clamp tolerance are pulled to the boundary; farther out throws
// PointOutsideDomain.
double interp_sample(const ScalarField& f, Vec2 p);
cplx interp_sample(const ComplexField& f, Vec2 p);
std::vector<double> interp_sample(const ScalarField& f, std::span<const Vec2> pts);
std::vector<cplx> interp_sample(const ComplexField& f, std::span<const Vec2> pts);

}  // namespace qrd

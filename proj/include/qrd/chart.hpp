#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "qrd/errors.hpp"

namespace qrd {

using cplx = std::complex<double>;

struct Vec2 {
    double x = 0.0, y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

// row-major 2x2: [[a,b],[c,d]]
struct Mat2 {
    double a = 0, b = 0, c = 0, d = 0;
    double det() const { return a * d - b * c; }
};

// Simply connected planar domains: disk, axis-aligned rectangle, or
// star-shaped region with Fourier boundary r(theta). An optional pose
// (center + rotation) places the domain in the plane.
struct DomainSpec {
    enum class Type { Disk, Rect, Star };
    Type type = Type::Disk;
    double radius = 1.0;              // Disk
    double w = 1.0, h = 1.0;          // Rect
    std::vector<double> coeffs;       // Star: a0, a1, b1, a2, b2, ...
    Vec2 center{0.0, 0.0};
    double rotation = 0.0;
    bool has_center = false;          // Rect: center given => centered box,
                                      // else box spans [0,w]x[0,h]

    // boundary radius about the domain center in the body frame; for
    // rectangles this is the star-shaped box radius about the box center
    double r_theta(double th) const;
    double dr_theta(double th) const;  // Disk/Star only
    double analytic_area() const;
    double analytic_perimeter() const;
};

struct BoundarySample {
    Vec2 pos;
    double ds = 0.0;      // arclength weight |dz|
    Vec2 normal;          // unit outward
    cplx tangent;         // unit, positive orientation (= i * normal)
    int i = 0, j = 0;     // owning node index
};

// Boundary-fitted structured grid over a DomainSpec. Polar-like mapped grid
// for disks and star domains (reference s in (0,1], periodic t), tensor grid
// for rectangles (reference (s,t) in [0,1]^2). Immutable after construction.
class Chart {
public:
    enum class Kind { Polar, Rect };

    Kind kind = Kind::Polar;
    DomainSpec spec;
    int nu = 0, nv = 0;                // nodes per axis
    double ds = 0.0, dt = 0.0;         // reference spacings
    std::vector<Vec2> nodes;           // nu*nv, physical coordinates
    std::vector<Mat2> jac;             // d(phys)/d(ref) per node
    std::vector<double> area_weights;  // quadrature weight per node
    std::vector<BoundarySample> boundary;
    double h_cfl = 0.0;                // smallest physical node spacing along
                                       // the non-degenerate axes
    double clamp_tol = 0.0;            // one cell diagonal

    int idx(int i, int j) const { return i * nv + j; }
    std::size_t size() const { return nodes.size(); }
    bool periodic_t() const { return kind == Kind::Polar; }

    // reference s-coordinate of radial ring k (Polar) or x-line i (Rect)
    double s_of(int i) const {
        return kind == Kind::Polar ? (i + 0.5) * ds : i * ds;
    }
    double t_of(int j) const { return j * dt; }

    Vec2 to_physical(double s, double t) const;
    Mat2 jacobian_at(double s, double t) const;

    // point at relative radius s along the body-frame ray theta from the
    // domain center (used by cross-kind base maps)
    Vec2 radial_point(double s, double theta) const;
    // body-frame polar coordinates of a physical point about the center
    void to_radial(Vec2 p, double& s, double& theta) const;

    // Inverse chart map. Returns false when the point lies outside the
    // reference domain by more than `tol_cells` cell diagonals; otherwise
    // (s,t) are clamped into range.
    bool to_reference(Vec2 p, double& s, double& t, double tol_phys) const;

    bool inside(Vec2 p, double tol) const;

    // metric data for elliptic assembly at an arbitrary reference point:
    // determinant of jac and the contravariant metric detJ * g^{ab}
    void metric(double s, double t, double& detj, double& mss, double& mst,
                double& mtt) const;
};

Chart build_chart(const DomainSpec& spec, int n);

}  // namespace qrd

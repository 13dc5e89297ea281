#include "qrd/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>

namespace qrd {

namespace {

// centered first-derivative weights of order 2p, k = 1..p
const double kC1[1] = {0.5};
const double kC2[2] = {2.0 / 3.0, -1.0 / 12.0};
const double kC3[3] = {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
const double kC4[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
const double kC5[5] = {5.0 / 6.0, -5.0 / 21.0, 5.0 / 84.0, -5.0 / 504.0, 1.0 / 1260.0};
const double* kCentered[5] = {kC1, kC2, kC3, kC4, kC5};

int angular_half_width(int nv) {
    // widest centered stencil that fits the period without wrapping onto itself
    int p = (nv - 1) / 2;
    return std::min(p, 5);
}

template <class T>
void d_ref_s(const Chart& ch, const std::vector<T>& in, std::vector<T>& out) {
    const int nu = ch.nu, nv = ch.nv;
    const double inv2 = 1.0 / (2.0 * ch.ds);
    for (int j = 0; j < nv; ++j) {
        out[ch.idx(0, j)] =
            (-3.0 * in[ch.idx(0, j)] + 4.0 * in[ch.idx(1, j)] - in[ch.idx(2, j)]) * inv2;
        out[ch.idx(nu - 1, j)] = (3.0 * in[ch.idx(nu - 1, j)] - 4.0 * in[ch.idx(nu - 2, j)] +
                                  in[ch.idx(nu - 3, j)]) *
                                 inv2;
    }
    for (int i = 1; i < nu - 1; ++i)
        for (int j = 0; j < nv; ++j)
            out[ch.idx(i, j)] = (in[ch.idx(i + 1, j)] - in[ch.idx(i - 1, j)]) * inv2;
}

template <class T>
void d_ref_t(const Chart& ch, const std::vector<T>& in, std::vector<T>& out) {
    const int nu = ch.nu, nv = ch.nv;
    if (ch.periodic_t()) {
        const int p = angular_half_width(nv);
        const double* w = kCentered[p - 1];
        const double invdt = 1.0 / ch.dt;
        for (int i = 0; i < nu; ++i) {
            const T* row = &in[ch.idx(i, 0)];
            T* orow = &out[ch.idx(i, 0)];
            for (int j = 0; j < nv; ++j) {
                T acc{};
                for (int k = 1; k <= p; ++k) {
                    int jp = j + k;
                    if (jp >= nv) jp -= nv;
                    int jm = j - k;
                    if (jm < 0) jm += nv;
                    acc += w[k - 1] * (row[jp] - row[jm]);
                }
                orow[j] = acc * invdt;
            }
        }
        return;
    }
    const double inv2 = 1.0 / (2.0 * ch.dt);
    for (int i = 0; i < nu; ++i) {
        out[ch.idx(i, 0)] =
            (-3.0 * in[ch.idx(i, 0)] + 4.0 * in[ch.idx(i, 1)] - in[ch.idx(i, 2)]) * inv2;
        out[ch.idx(i, nv - 1)] = (3.0 * in[ch.idx(i, nv - 1)] - 4.0 * in[ch.idx(i, nv - 2)] +
                                  in[ch.idx(i, nv - 3)]) *
                                 inv2;
        for (int j = 1; j < nv - 1; ++j)
            out[ch.idx(i, j)] = (in[ch.idx(i, j + 1)] - in[ch.idx(i, j - 1)]) * inv2;
    }
}

template <class T, class Field>
std::pair<Field, Field> grad_impl(const Field& f) {
    const Chart& ch = *f.chart;
    std::vector<T> fs(f.v.size()), ft(f.v.size());
    d_ref_s(ch, f.v, fs);
    d_ref_t(ch, f.v, ft);
    Field fx(ch), fy(ch);
    for (std::size_t id = 0; id < f.v.size(); ++id) {
        const Mat2& J = ch.jac[id];
        double inv = 1.0 / J.det();
        fx.v[id] = (J.d * fs[id] - J.c * ft[id]) * inv;
        fy.v[id] = (-J.b * fs[id] + J.a * ft[id]) * inv;
    }
    return {std::move(fx), std::move(fy)};
}

}  // namespace

std::pair<ScalarField, ScalarField> grad_xy(const ScalarField& f) {
    return grad_impl<double>(f);
}
std::pair<ComplexField, ComplexField> grad_xy(const ComplexField& f) {
    return grad_impl<cplx>(f);
}

ComplexField wirtinger(const ScalarField& f, Wirtinger which) {
    auto [fx, fy] = grad_xy(f);
    ComplexField out(*f.chart);
    double sign = (which == Wirtinger::d_zbar) ? 1.0 : -1.0;
    for (std::size_t id = 0; id < out.v.size(); ++id)
        out.v[id] = 0.5 * cplx(fx.v[id], sign * fy.v[id]);
    return out;
}

ComplexField wirtinger(const ComplexField& f, Wirtinger which) {
    auto [fx, fy] = grad_xy(f);
    ComplexField out(*f.chart);
    cplx is = (which == Wirtinger::d_zbar) ? cplx(0, 1) : cplx(0, -1);
    for (std::size_t id = 0; id < out.v.size(); ++id)
        out.v[id] = 0.5 * (fx.v[id] + is * fy.v[id]);
    return out;
}

double integrate_area(const ScalarField& f) {
    double acc = 0.0;
    for (std::size_t id = 0; id < f.v.size(); ++id) acc += f.v[id] * f.chart->area_weights[id];
    return acc;
}

double integrate_boundary(const Chart& chart, std::span<const double> samples) {
    double acc = 0.0;
    for (std::size_t b = 0; b < chart.boundary.size(); ++b)
        acc += samples[b] * chart.boundary[b].ds;
    return acc;
}

std::vector<cplx> boundary_tangent_sq(const Chart& chart) {
    std::vector<cplx> out(chart.boundary.size());
    for (std::size_t b = 0; b < out.size(); ++b) {
        cplx tau = chart.boundary[b].tangent;
        out[b] = tau * tau;
    }
    return out;
}

std::vector<double> boundary_trace(const ScalarField& f) {
    std::vector<double> out(f.chart->boundary.size());
    for (std::size_t b = 0; b < out.size(); ++b) {
        const auto& s = f.chart->boundary[b];
        out[b] = f.v[f.chart->idx(s.i, s.j)];
    }
    return out;
}

std::vector<cplx> boundary_trace(const ComplexField& f) {
    std::vector<cplx> out(f.chart->boundary.size());
    for (std::size_t b = 0; b < out.size(); ++b) {
        const auto& s = f.chart->boundary[b];
        out[b] = f.v[f.chart->idx(s.i, s.j)];
    }
    return out;
}

std::vector<double> normal_derivative(const ScalarField& f) {
    auto [fx, fy] = grad_xy(f);
    std::vector<double> out(f.chart->boundary.size());
    for (std::size_t b = 0; b < out.size(); ++b) {
        const auto& s = f.chart->boundary[b];
        int id = f.chart->idx(s.i, s.j);
        out[b] = s.normal.x * fx.v[id] + s.normal.y * fy.v[id];
    }
    return out;
}

namespace {

// degree-3 bivariate basis, 10 terms
std::array<double, 10> poly_basis(double x, double y) {
    return {1.0, x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y};
}

void pole_fit(const Chart& ch, std::vector<double>& v) {
    const int nu = ch.nu, nv = ch.nv;
    // degree-3 Cartesian LSQ over rings 3..9, rebuild rings 0..2
    const int lo = 3, hi = std::min(9, nu - 6);
    Eigen::MatrixXd A((hi - lo + 1) * nv, 10);
    Eigen::VectorXd rhs((hi - lo + 1) * nv);
    int row = 0;
    Vec2 c = ch.spec.center;
    for (int i = lo; i <= hi; ++i)
        for (int j = 0; j < nv; ++j, ++row) {
            Vec2 p = ch.nodes[ch.idx(i, j)] - c;
            auto b = poly_basis(p.x, p.y);
            for (int q = 0; q < 10; ++q) A(row, q) = b[q];
            rhs(row) = v[ch.idx(i, j)];
        }
    Eigen::VectorXd coef = (A.transpose() * A).ldlt().solve(A.transpose() * rhs);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < nv; ++j) {
            Vec2 p = ch.nodes[ch.idx(i, j)] - c;
            auto b = poly_basis(p.x, p.y);
            double val = 0.0;
            for (int q = 0; q < 10; ++q) val += coef(q) * b[q];
            v[ch.idx(i, j)] = val;
        }
}

void repair_polar(const Chart& ch, std::vector<double>& v) {
    const int nu = ch.nu, nv = ch.nv;
    pole_fit(ch, v);
    // boundary: per-column quadratic extrapolation in s from rings b-5..b-3
    const int b = nu - 1;
    const double s0 = ch.s_of(b - 5), s1 = ch.s_of(b - 4), s2 = ch.s_of(b - 3);
    for (int k = b - 2; k <= b; ++k) {
        double s = ch.s_of(k);
        double L0 = (s - s1) * (s - s2) / ((s0 - s1) * (s0 - s2));
        double L1 = (s - s0) * (s - s2) / ((s1 - s0) * (s1 - s2));
        double L2 = (s - s0) * (s - s1) / ((s2 - s0) * (s2 - s1));
        for (int j = 0; j < nv; ++j)
            v[ch.idx(k, j)] = L0 * v[ch.idx(b - 5, j)] + L1 * v[ch.idx(b - 4, j)] +
                              L2 * v[ch.idx(b - 3, j)];
    }
}

void repair_rect(const Chart& ch, std::vector<double>& v) {
    const int nu = ch.nu, nv = ch.nv;
    auto extrap = [](double q0, double q1, double q2, double d) {
        // values at distances 3,4,5 from the edge, evaluated at distance d
        double L0 = (d - 4.0) * (d - 5.0) / 2.0;
        double L1 = -(d - 3.0) * (d - 5.0);
        double L2 = (d - 3.0) * (d - 4.0) / 2.0;
        return L0 * q0 + L1 * q1 + L2 * q2;
    };
    for (int j = 0; j < nv; ++j)
        for (int d = 0; d < 3; ++d) {
            v[ch.idx(d, j)] = extrap(v[ch.idx(3, j)], v[ch.idx(4, j)], v[ch.idx(5, j)], d);
            v[ch.idx(nu - 1 - d, j)] = extrap(v[ch.idx(nu - 4, j)], v[ch.idx(nu - 5, j)],
                                              v[ch.idx(nu - 6, j)], d);
        }
    for (int i = 0; i < nu; ++i)
        for (int d = 0; d < 3; ++d) {
            v[ch.idx(i, d)] = extrap(v[ch.idx(i, 3)], v[ch.idx(i, 4)], v[ch.idx(i, 5)], d);
            v[ch.idx(i, nv - 1 - d)] = extrap(v[ch.idx(i, nv - 4)], v[ch.idx(i, nv - 5)],
                                              v[ch.idx(i, nv - 6)], d);
        }
}

}  // namespace

ScalarField cascade_repair(const ScalarField& f) {
    ScalarField out = f;
    const Chart& ch = *f.chart;
    if (ch.nu < 24 || ch.nv < 24) return out;  // too coarse to carry the fit
    if (ch.kind == Chart::Kind::Polar)
        repair_polar(ch, out.v);
    else
        repair_rect(ch, out.v);
    return out;
}

void pole_repair(ScalarField& f) {
    const Chart& ch = *f.chart;
    if (ch.kind != Chart::Kind::Polar || ch.nu < 24 || ch.nv < 24) return;
    pole_fit(ch, f.v);
}

namespace {

struct Window {
    int k0 = 0, j0 = 0, nw = 4, mw = 4;
    double wu[4], wv[8];
};

void lagrange_weights(double xi, int k0, int n, double* w) {
    for (int a = 0; a < n; ++a) {
        double acc = 1.0;
        for (int b = 0; b < n; ++b)
            if (a != b) acc *= (xi - (k0 + b)) / double(a - b);
        w[a] = acc;
    }
}

bool make_window(const Chart& ch, Vec2 p, Window& win) {
    double s, t;
    if (!ch.to_reference(p, s, t, ch.clamp_tol)) return false;
    double u = (ch.kind == Chart::Kind::Polar) ? s / ch.ds - 0.5 : s / ch.ds;
    // polar u may dip to -0.5 inside the innermost ring; the window stays at
    // the first rings and extrapolates toward the pole
    double ulo = (ch.kind == Chart::Kind::Polar) ? -0.5 : 0.0;
    u = std::clamp(u, ulo, double(ch.nu - 1));
    win.k0 = std::clamp(int(std::floor(u)) - 1, 0, ch.nu - 4);
    win.nw = 4;
    lagrange_weights(u, win.k0, 4, win.wu);
    double vv = t / ch.dt;
    if (ch.periodic_t()) {
        win.mw = std::min(8, ch.nv);
        win.j0 = int(std::floor(vv)) - (win.mw / 2 - 1);
        lagrange_weights(vv, win.j0, win.mw, win.wv);
    } else {
        vv = std::clamp(vv, 0.0, double(ch.nv - 1));
        win.mw = 4;
        win.j0 = std::clamp(int(std::floor(vv)) - 1, 0, ch.nv - 4);
        lagrange_weights(vv, win.j0, 4, win.wv);
    }
    return true;
}

template <class T, class Field>
T sample_one(const Field& f, Vec2 p) {
    const Chart& ch = *f.chart;
    Window w;
    if (!make_window(ch, p, w))
        throw Error(ErrorKind::PointOutsideDomain, "interpolation point outside chart");
    T acc{};
    for (int a = 0; a < w.nw; ++a) {
        int i = w.k0 + a;
        T racc{};
        for (int b = 0; b < w.mw; ++b) {
            int j = w.j0 + b;
            if (ch.periodic_t()) {
                j %= ch.nv;
                if (j < 0) j += ch.nv;
            }
            racc += w.wv[b] * f.v[ch.idx(i, j)];
        }
        acc += w.wu[a] * racc;
    }
    return acc;
}

}  // namespace

double interp_sample(const ScalarField& f, Vec2 p) { return sample_one<double>(f, p); }
cplx interp_sample(const ComplexField& f, Vec2 p) { return sample_one<cplx>(f, p); }

std::vector<double> interp_sample(const ScalarField& f, std::span<const Vec2> pts) {
    std::vector<double> out(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) out[k] = sample_one<double>(f, pts[k]);
    return out;
}

std::vector<cplx> interp_sample(const ComplexField& f, std::span<const Vec2> pts) {
    std::vector<cplx> out(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) out[k] = sample_one<cplx>(f, pts[k]);
    return out;
}

}  // namespace qrd

#include "qrd/chart.hpp"

#include <cmath>

namespace qrd {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

inline Vec2 rot(Vec2 v, double c, double s) {
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}
}  // namespace

double DomainSpec::r_theta(double th) const {
    if (type == Type::Disk) return radius;
    if (type == Type::Rect) {
        double cx = std::abs(std::cos(th)), sx = std::abs(std::sin(th));
        double rx = cx > 1e-300 ? (w / 2) / cx : 1e300;
        double ry = sx > 1e-300 ? (h / 2) / sx : 1e300;
        return std::min(rx, ry);
    }
    double r = coeffs.empty() ? 0.0 : coeffs[0];
    for (std::size_t k = 1; 2 * k - 1 < coeffs.size(); ++k) {
        r += coeffs[2 * k - 1] * std::cos(double(k) * th);
        if (2 * k < coeffs.size()) r += coeffs[2 * k] * std::sin(double(k) * th);
    }
    return r;
}

double DomainSpec::dr_theta(double th) const {
    if (type == Type::Disk) return 0.0;
    double r = 0.0;
    for (std::size_t k = 1; 2 * k - 1 < coeffs.size(); ++k) {
        r -= double(k) * coeffs[2 * k - 1] * std::sin(double(k) * th);
        if (2 * k < coeffs.size()) r += double(k) * coeffs[2 * k] * std::cos(double(k) * th);
    }
    return r;
}

double DomainSpec::analytic_area() const {
    switch (type) {
        case Type::Disk: return M_PI * radius * radius;
        case Type::Rect: return w * h;
        case Type::Star: {
            // area = 1/2 int r^2 dtheta = pi (a0^2 + 1/2 sum (ak^2+bk^2))
            double a = coeffs.empty() ? 0.0 : coeffs[0] * coeffs[0];
            for (std::size_t k = 1; k < coeffs.size(); ++k) a += 0.5 * coeffs[k] * coeffs[k];
            return M_PI * a;
        }
    }
    return 0.0;
}

double DomainSpec::analytic_perimeter() const {
    switch (type) {
        case Type::Disk: return kTwoPi * radius;
        case Type::Rect: return 2.0 * (w + h);
        case Type::Star: {
            const int m = 16384;
            double p = 0.0;
            for (int j = 0; j < m; ++j) {
                double th = kTwoPi * j / m;
                double r = r_theta(th), dr = dr_theta(th);
                p += std::sqrt(r * r + dr * dr);
            }
            return p * kTwoPi / m;
        }
    }
    return 0.0;
}

Vec2 Chart::to_physical(double s, double t) const {
    double c = std::cos(spec.rotation), sn = std::sin(spec.rotation);
    if (kind == Kind::Polar) {
        double th = kTwoPi * t;
        double r = s * spec.r_theta(th);
        Vec2 body{r * std::cos(th), r * std::sin(th)};
        return spec.center + rot(body, c, sn);
    }
    Vec2 o = spec.has_center ? Vec2{spec.center.x - spec.w / 2, spec.center.y - spec.h / 2}
                             : Vec2{0.0, 0.0};
    Vec2 pivot{o.x + spec.w / 2, o.y + spec.h / 2};
    Vec2 body{o.x + s * spec.w - pivot.x, o.y + t * spec.h - pivot.y};
    return pivot + rot(body, c, sn);
}

Mat2 Chart::jacobian_at(double s, double t) const {
    double c = std::cos(spec.rotation), sn = std::sin(spec.rotation);
    if (kind == Kind::Rect) {
        // d(phys)/d(s,t) = Rot * diag(w, h)
        return {c * spec.w, -sn * spec.h, sn * spec.w, c * spec.h};
    }
    double th = kTwoPi * t;
    double rho = spec.r_theta(th), drho = spec.dr_theta(th);
    double ct = std::cos(th), st = std::sin(th);
    // body frame: dP/ds = rho e^{i th}, dP/dt = 2 pi s (rho' + i rho) e^{i th}
    Vec2 es{rho * ct, rho * st};
    Vec2 et{kTwoPi * s * (drho * ct - rho * st), kTwoPi * s * (drho * st + rho * ct)};
    es = rot(es, c, sn);
    et = rot(et, c, sn);
    return {es.x, et.x, es.y, et.y};
}

Vec2 Chart::radial_point(double s, double theta) const {
    double c = std::cos(spec.rotation), sn = std::sin(spec.rotation);
    double r = s * spec.r_theta(theta);
    Vec2 body{r * std::cos(theta), r * std::sin(theta)};
    Vec2 center = spec.center;
    if (kind == Kind::Rect && !spec.has_center) center = {spec.w / 2, spec.h / 2};
    return center + rot(body, c, sn);
}

void Chart::to_radial(Vec2 p, double& s, double& theta) const {
    double c = std::cos(spec.rotation), sn = std::sin(spec.rotation);
    Vec2 center = spec.center;
    if (kind == Kind::Rect && !spec.has_center) center = {spec.w / 2, spec.h / 2};
    Vec2 body = rot(p - center, c, -sn);
    theta = std::atan2(body.y, body.x);
    if (theta < 0) theta += kTwoPi;
    s = norm(body) / spec.r_theta(theta);
}

bool Chart::to_reference(Vec2 p, double& s, double& t, double tol_phys) const {
    double c = std::cos(spec.rotation), sn = std::sin(spec.rotation);
    if (kind == Kind::Polar) {
        Vec2 body = rot(p - spec.center, c, -sn);
        double th = std::atan2(body.y, body.x);
        if (th < 0) th += kTwoPi;
        double rho = spec.r_theta(th);
        double r = norm(body);
        s = r / rho;
        t = th / kTwoPi;
        if (t >= 1.0) t -= 1.0;
        if (s > 1.0) {
            if ((s - 1.0) * rho > tol_phys) return false;
            s = 1.0;
        }
        return true;
    }
    Vec2 o = spec.has_center ? Vec2{spec.center.x - spec.w / 2, spec.center.y - spec.h / 2}
                             : Vec2{0.0, 0.0};
    Vec2 pivot{o.x + spec.w / 2, o.y + spec.h / 2};
    Vec2 body = pivot + rot(p - pivot, c, -sn);
    s = (body.x - o.x) / spec.w;
    t = (body.y - o.y) / spec.h;
    double ex = std::max({0.0, -s * spec.w, (s - 1.0) * spec.w});
    double ey = std::max({0.0, -t * spec.h, (t - 1.0) * spec.h});
    if (std::hypot(ex, ey) > tol_phys) return false;
    s = std::min(1.0, std::max(0.0, s));
    t = std::min(1.0, std::max(0.0, t));
    return true;
}

bool Chart::inside(Vec2 p, double tol) const {
    double s, t;
    return to_reference(p, s, t, tol);
}

void Chart::metric(double s, double t, double& detj, double& mss, double& mst,
                   double& mtt) const {
    Mat2 J = jacobian_at(s, t);
    detj = J.det();
    // detJ * (J^{-1} J^{-T})
    mss = (J.b * J.b + J.d * J.d) / detj;
    mst = -(J.a * J.b + J.c * J.d) / detj;
    mtt = (J.a * J.a + J.c * J.c) / detj;
}

Chart build_chart(const DomainSpec& spec, int n) {
    if (n < 8) throw Error(ErrorKind::BadConfig, "grid resolution must be >= 8");
    Chart ch;
    ch.spec = spec;
    ch.nu = n;
    ch.nv = n;

    if (spec.type == DomainSpec::Type::Rect) {
        if (spec.w <= 0 || spec.h <= 0)
            throw Error(ErrorKind::DegenerateBoundary, "rectangle sides must be positive");
        ch.kind = Chart::Kind::Rect;
        ch.ds = 1.0 / (n - 1);
        ch.dt = 1.0 / (n - 1);
    } else {
        if (spec.type == DomainSpec::Type::Disk && spec.radius <= 0)
            throw Error(ErrorKind::DegenerateBoundary, "disk radius must be positive");
        if (spec.type == DomainSpec::Type::Star) {
            if (spec.coeffs.empty())
                throw Error(ErrorKind::DegenerateBoundary, "star boundary needs coefficients");
            for (int j = 0; j < 4096; ++j) {
                if (spec.r_theta(kTwoPi * j / 4096.0) <= 0)
                    throw Error(ErrorKind::DegenerateBoundary, "star boundary r(theta) <= 0");
            }
        }
        ch.kind = Chart::Kind::Polar;
        ch.ds = 1.0 / (n - 0.5);
        ch.dt = 1.0 / n;
    }

    ch.nodes.resize(std::size_t(n) * n);
    ch.jac.resize(ch.nodes.size());
    ch.area_weights.resize(ch.nodes.size());

    double hmin = 1e300, diag = 0.0;
    for (int i = 0; i < n; ++i) {
        double s = ch.s_of(i);
        for (int j = 0; j < n; ++j) {
            double t = ch.t_of(j);
            int id = ch.idx(i, j);
            ch.nodes[id] = ch.to_physical(s, t);
            Mat2 J = ch.jacobian_at(s, t);
            ch.jac[id] = J;
            double frac_s = 1.0, frac_t = 1.0;
            if (ch.kind == Chart::Kind::Polar) {
                if (i == n - 1) frac_s = 0.5;
            } else {
                if (i == 0 || i == n - 1) frac_s = 0.5;
                if (j == 0 || j == n - 1) frac_t = 0.5;
            }
            ch.area_weights[id] = std::abs(J.det()) * ch.ds * ch.dt * frac_s * frac_t;
            double les = std::hypot(J.a, J.c) * ch.ds;
            double let = std::hypot(J.b, J.d) * ch.dt;
            hmin = std::min(hmin, les);
            if (ch.kind == Chart::Kind::Rect) hmin = std::min(hmin, let);
            diag = std::max(diag, std::hypot(les, let));
        }
    }
    ch.h_cfl = hmin;
    ch.clamp_tol = diag;

    double c = std::cos(spec.rotation), sn = std::sin(spec.rotation);
    if (ch.kind == Chart::Kind::Polar) {
        ch.boundary.resize(n);
        for (int j = 0; j < n; ++j) {
            double th = kTwoPi * ch.t_of(j);
            double rho = spec.r_theta(th), drho = spec.dr_theta(th);
            BoundarySample& b = ch.boundary[j];
            b.i = n - 1;
            b.j = j;
            b.pos = ch.nodes[ch.idx(n - 1, j)];
            double sp = std::hypot(rho, drho);
            b.ds = sp * kTwoPi * ch.dt;
            cplx zp = (cplx(drho, rho) * std::exp(cplx(0, th))) / sp;  // unit tangent, body
            cplx tau = zp * std::exp(cplx(0, spec.rotation));
            b.tangent = tau;
            b.normal = {tau.imag(), -tau.real()};  // n = -i tau
        }
    } else {
        ch.boundary.reserve(4 * n - 4);
        auto push = [&](int i, int j, cplx tau_body, double step) {
            BoundarySample b;
            b.i = i;
            b.j = j;
            b.pos = ch.nodes[ch.idx(i, j)];
            b.ds = step;
            cplx tau = tau_body * std::exp(cplx(0, spec.rotation));
            b.tangent = tau;
            b.normal = {tau.imag(), -tau.real()};
            ch.boundary.push_back(b);
        };
        double dx = spec.w * ch.ds, dy = spec.h * ch.dt;
        // counterclockwise: bottom, right, top, left; corners take the
        // following edge's tangent and half of each adjacent edge's step
        for (int i = 0; i < n; ++i)
            push(i, 0, cplx(1, 0), (i == 0 || i == n - 1) ? (dx + dy) / 2 : dx);
        for (int j = 1; j < n; ++j)
            push(n - 1, j, cplx(0, 1), (j == n - 1) ? (dx + dy) / 2 : dy);
        for (int i = n - 2; i >= 0; --i)
            push(i, n - 1, cplx(-1, 0), (i == 0) ? (dx + dy) / 2 : dx);
        for (int j = n - 2; j > 0; --j) push(0, j, cplx(0, -1), dy);
    }
    return ch;
}

}  // namespace qrd

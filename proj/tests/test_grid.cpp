#include <doctest.h>

#include "helpers.hpp"

using namespace qt;

TEST_CASE("disk chart: area, perimeter, boundary frame") {
    Chart ch = disk_chart(64);
    double area = 0.0;
    for (double w : ch.area_weights) area += w;
    CHECK(std::abs(area - M_PI) < 3e-3);

    double perim = 0.0;
    for (const auto& b : ch.boundary) perim += b.ds;
    CHECK(std::abs(perim - 2 * M_PI) < 1e-10);  // periodic trapezoid is exact here

    for (const auto& b : ch.boundary) {
        cplx tau = b.tangent;
        CHECK(std::abs(tau.real() * b.normal.x + tau.imag() * b.normal.y) < 1e-12);
        // tangent is the 90 degree rotation of the normal
        CHECK(std::abs(tau - cplx(0, 1) * cplx(b.normal.x, b.normal.y)) < 1e-12);
        CHECK(std::abs(std::abs(tau) - 1.0) < 1e-12);
    }
    for (const auto& J : ch.jac) CHECK(J.det() > 0.0);
}

TEST_CASE("square chart: exact tensor quadrature") {
    Chart ch = square_chart(32);
    double area = 0.0;
    for (double w : ch.area_weights) area += w;
    CHECK(area == doctest::Approx(1.0).epsilon(1e-14));
    double perim = 0.0;
    for (const auto& b : ch.boundary) perim += b.ds;
    CHECK(perim == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(int(ch.boundary.size()) == 4 * 32 - 4);
}

TEST_CASE("star chart: area within second order and positive jacobian") {
    DomainSpec d;
    d.type = DomainSpec::Type::Star;
    d.coeffs = {1.0, 0.0, 0.0, 0.15, 0.05, 0.08};  // a0,a1,b1,a2,b2,a3
    Chart ch = build_chart(d, 64);
    double area = 0.0;
    for (double w : ch.area_weights) area += w;
    CHECK(std::abs(area - d.analytic_area()) < 5e-3 * d.analytic_area());
    for (const auto& J : ch.jac) CHECK(J.det() > 0.0);
    double perim = 0.0;
    for (const auto& b : ch.boundary) perim += b.ds;
    CHECK(std::abs(perim - d.analytic_perimeter()) < 1e-6);
}

TEST_CASE("unsupported and degenerate domains") {
    CHECK_THROWS_AS(domain_from_json_text(R"({"type":"annulus","r0":0.5,"r1":1.0})"), Error);
    try {
        domain_from_json_text(R"({"type":"annulus"})");
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnsupportedDomain);
    }
    DomainSpec bad;
    bad.type = DomainSpec::Type::Star;
    bad.coeffs = {0.2, 0.5};  // r(pi) < 0
    CHECK_THROWS_AS(build_chart(bad, 32), Error);
}

TEST_CASE("wirtinger derivative on x^2+y^2 and constants") {
    for (bool polar : {true, false}) {
        Chart ch = polar ? disk_chart(64) : square_chart(64, 2.0, 2.0, true);
        ScalarField f = sample_scalar(ch, [](double x, double y) { return x * x + y * y; });
        ComplexField dz = wirtinger(f, Wirtinger::d_zbar);
        double err = 0.0;
        for (std::size_t id = 0; id < ch.size(); ++id)
            err = std::max(err,
                           std::abs(dz.v[id] - cplx(ch.nodes[id].x, ch.nodes[id].y)));
        CHECK(err < 1e-10);  // stencils are exact on quadratics

        ScalarField c = sample_scalar(ch, [](double, double) { return 3.25; });
        CHECK(max_abs_field(wirtinger(c, Wirtinger::d_zbar)) == 0.0);
        CHECK(max_abs_field(wirtinger(c, Wirtinger::d_z)) == 0.0);
    }
}

TEST_CASE("composed second derivative of zbar^2 is 2 up to O(h)") {
    for (int n : {48, 96}) {
        Chart ch = disk_chart(n);
        ComplexField f = sample_complex(ch, [](double x, double y) {
            cplx zb(x, -y);
            return zb * zb;
        });
        ComplexField d2 = wirtinger(wirtinger(f, Wirtinger::d_zbar), Wirtinger::d_zbar);
        double err = 0.0;
        for (const cplx& v : d2.v) err = std::max(err, std::abs(v - 2.0));
        CHECK(err < 12.0 / n);
    }
}

TEST_CASE("wirtinger consistency: d_z + d_zbar equals the x-derivative") {
    Chart ch = disk_chart(48);
    ScalarField f = sample_scalar(ch, [](double x, double y) { return std::sin(x + 2 * y); });
    ComplexField a = wirtinger(f, Wirtinger::d_z);
    ComplexField b = wirtinger(f, Wirtinger::d_zbar);
    auto [fx, fy] = grad_xy(f);
    double err = 0.0;
    for (std::size_t id = 0; id < ch.size(); ++id)
        err = std::max(err, std::abs(a.v[id] + b.v[id] - fx.v[id]));
    CHECK(err < 1e-12);
}

TEST_CASE("integrate_area examples") {
    Chart sq = square_chart(32);
    CHECK(integrate_area(unit_field(sq)) == doctest::Approx(1.0).epsilon(1e-14));

    Chart d = disk_chart(64);
    CHECK(std::abs(integrate_area(unit_field(d)) - M_PI) < 3e-3);

    Chart sq2 = square_chart(33, 2.0, 2.0, true);
    ScalarField fx = sample_scalar(sq2, [](double x, double) { return x; });
    CHECK(std::abs(integrate_area(fx)) < 1e-12);
}

TEST_CASE("integrate_boundary examples") {
    Chart d = disk_chart(64);
    std::vector<double> one(d.boundary.size(), 1.0);
    CHECK(std::abs(integrate_boundary(d, one) - 2 * M_PI) < 1e-10);
    std::vector<double> zero(d.boundary.size(), 0.0);
    CHECK(integrate_boundary(d, zero) == 0.0);
    std::vector<double> sine(d.boundary.size());
    for (std::size_t b = 0; b < sine.size(); ++b) {
        Vec2 p = d.boundary[b].pos;
        sine[b] = std::sin(std::atan2(p.y, p.x));
    }
    CHECK(std::abs(integrate_boundary(d, sine)) < 1e-10);
}

TEST_CASE("boundary tangent squared") {
    Chart d = disk_chart(64);
    auto t2 = boundary_tangent_sq(d);
    for (std::size_t b = 0; b < t2.size(); ++b) {
        Vec2 p = d.boundary[b].pos;
        double th = std::atan2(p.y, p.x);
        CHECK(std::abs(t2[b] - (-std::exp(cplx(0, 2 * th)))) < 1e-12);
        CHECK(std::abs(std::abs(t2[b]) - 1.0) < 1e-12);
    }
    Chart sq = square_chart(16);
    auto s2 = boundary_tangent_sq(sq);
    // bottom edge comes first in orientation order
    CHECK(std::abs(s2[1] - cplx(1, 0)) < 1e-14);
}

TEST_CASE("interpolation: nodes, linears, smooth convergence") {
    Chart ch = disk_chart(48);
    ScalarField f = sample_scalar(ch, [](double x, double y) { return 2 * x - 0.7 * y; });
    int id = ch.idx(20, 11);
    CHECK(interp_sample(f, ch.nodes[id]) == doctest::Approx(f.v[id]).epsilon(1e-14));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    // linear reproduction is exact on the tensor chart (linears are bilinear
    // in its reference coordinates); on the polar chart it is spectral-level
    Chart sq = square_chart(48, 2.0, 2.0, true);
    ScalarField fsq = sample_scalar(sq, [](double x, double y) { return 2 * x - 0.7 * y; });
    for (int k = 0; k < 50; ++k) {
        Vec2 p{u(rng), u(rng)};
        CHECK(std::abs(interp_sample(fsq, p) - (2 * p.x - 0.7 * p.y)) < 1e-12);
        CHECK(std::abs(interp_sample(f, p) - (2 * p.x - 0.7 * p.y)) < 1e-9);
    }
    auto smooth = [](double x, double y) { return std::sin(2 * x) * std::cos(y + 0.3); };
    double errs[2];
    int k = 0;
    for (int n : {32, 64}) {
        Chart c2 = disk_chart(n);
        ScalarField g = sample_scalar(c2, smooth);
        double e = 0.0;
        std::mt19937_64 r2(3);
        for (int q = 0; q < 200; ++q) {
            Vec2 p{u(r2), u(r2)};
            e = std::max(e, std::abs(interp_sample(g, p) - smooth(p.x, p.y)));
        }
        errs[k++] = e;
    }
    CHECK(errs[0] / errs[1] > 6.0);  // at least O(h^3)
    CHECK_THROWS_AS(interp_sample(f, Vec2{3.0, 3.0}), Error);
}

TEST_CASE("discrete divergence theorem for stream velocities") {
    Chart ch = disk_chart(64);
    ScalarField psi = sample_scalar(ch, [](double x, double y) {
        double b = 1 - x * x - y * y;
        return b * b * (1 + x - 0.5 * y);
    });
    ComplexField v = velocity_of(psi);
    ScalarField vx(ch), vy(ch);
    for (std::size_t id = 0; id < ch.size(); ++id) {
        vx.v[id] = v.v[id].real();
        vy.v[id] = v.v[id].imag();
    }
    auto [dvx, dvy_unused] = grad_xy(vx);
    auto [dvx_unused, dvy] = grad_xy(vy);
    ScalarField div(ch);
    for (std::size_t id = 0; id < ch.size(); ++id) div.v[id] = dvx.v[id] + dvy.v[id];
    double h = 1.0 / 64;
    CHECK(std::abs(integrate_area(div)) < 10 * h * h * l2_area(psi));
}

TEST_CASE("grid refinement reduces stencil error by at least 3.5x") {
    auto exact_dzbar = [](double x, double y) {
        // f = sin(x) cos(y): fx = cos x cos y, fy = -sin x sin y
        return 0.5 * cplx(std::cos(x) * std::cos(y), -std::sin(x) * std::sin(y));
    };
    for (int kind = 0; kind < 2; ++kind) {
        double errs[2];
        int k = 0;
        for (int n : {32, 64}) {
            Chart ch = kind == 0 ? disk_chart(n) : square_chart(n, 2.0, 2.0, true);
            ScalarField f =
                sample_scalar(ch, [](double x, double y) { return std::sin(x) * std::cos(y); });
            ComplexField d = wirtinger(f, Wirtinger::d_zbar);
            double e = 0.0;
            for (std::size_t id = 0; id < ch.size(); ++id) {
                Vec2 p = ch.nodes[id];
                e = std::max(e, std::abs(d.v[id] - exact_dzbar(p.x, p.y)));
            }
            errs[k++] = e;
        }
        CHECK(errs[0] / errs[1] >= 3.5);
    }
}

TEST_CASE("posed charts: rotated translated disk keeps the frame") {
    DomainSpec d;
    d.type = DomainSpec::Type::Disk;
    d.radius = 1.0;
    d.center = {0.4, -0.2};
    d.has_center = true;
    d.rotation = 0.7;
    Chart ch = build_chart(d, 32);
    double area = 0.0;
    for (double w : ch.area_weights) area += w;
    CHECK(std::abs(area - M_PI) < 2e-2);
    for (const auto& b : ch.boundary) {
        Vec2 radial = b.pos - d.center;
        double nr = norm(radial);
        CHECK(std::abs(b.normal.x - radial.x / nr) < 1e-12);
        CHECK(std::abs(b.normal.y - radial.y / nr) < 1e-12);
    }
}

#include <doctest.h>

#include "helpers.hpp"

using namespace qt;

namespace {

double weighted_mean(const ScalarField& f) {
    double num = 0.0, den = 0.0;
    for (std::size_t id = 0; id < f.v.size(); ++id) {
        num += f.v[id] * f.chart->area_weights[id];
        den += f.chart->area_weights[id];
    }
    return num / den;
}

}  // namespace

TEST_CASE("Neumann Poisson: manufactured solutions converge at second order") {
    // disk: u = (1-r^2)^2, du/dn = 0 on r=1, laplacian = 16 r^2 - 8
    double errs[2];
    int k = 0;
    for (int n : {32, 64}) {
        Chart d = disk_chart(n);
        NeumannPoisson poisson(d);
        ScalarField rhs = sample_scalar(d, [](double x, double y) {
            double r2 = x * x + y * y;
            return 16 * r2 - 8;
        });
        ScalarField u = poisson.solve(rhs);
        ScalarField exact = sample_scalar(d, [](double x, double y) {
            double b = 1 - x * x - y * y;
            return b * b;
        });
        double shift = weighted_mean(exact);
        double e = 0.0;
        for (std::size_t id = 0; id < d.size(); ++id)
            e = std::max(e, std::abs(u.v[id] - (exact.v[id] - shift)));
        errs[k++] = e;
    }
    CHECK(errs[0] / errs[1] > 3.0);
    CHECK(errs[1] < 2e-3);

    // square: u = cos(pi x) cos(pi y) on [0,1]^2
    k = 0;
    for (int n : {33, 65}) {
        Chart sq = square_chart(n);
        NeumannPoisson poisson(sq);
        ScalarField rhs = sample_scalar(sq, [](double x, double y) {
            return -2 * M_PI * M_PI * std::cos(M_PI * x) * std::cos(M_PI * y);
        });
        ScalarField u = poisson.solve(rhs);
        double e = 0.0;
        for (std::size_t id = 0; id < sq.size(); ++id) {
            Vec2 q = sq.nodes[id];
            e = std::max(e, std::abs(u.v[id] - std::cos(M_PI * q.x) * std::cos(M_PI * q.y)));
        }
        errs[k++] = e;
    }
    CHECK(errs[0] / errs[1] > 3.0);
}

TEST_CASE("clamped biharmonic: zeros, manufactured square, quadratic on disk") {
    Chart sq = square_chart(33, 2.0, 2.0, true);  // [-1,1]^2
    ClampedBiharmonic bih(sq);
    std::vector<double> zero(sq.boundary.size(), 0.0);
    ScalarField zrhs(sq);
    auto r0 = bih.solve_with_constraint(zero, zero, zrhs);
    CHECK(max_abs_field(r0.psi) == 0.0);
    CHECK(r0.lambda == 0.0);

    // x^2 is biharmonic; constraint x is odd, so lambda stays 0
    std::vector<double> gd(sq.boundary.size()), gn(sq.boundary.size());
    for (std::size_t b = 0; b < sq.boundary.size(); ++b) {
        Vec2 p = sq.boundary[b].pos;
        gd[b] = p.x * p.x;
        gn[b] = 2 * p.x * sq.boundary[b].normal.x;
    }
    ScalarField cx = sample_scalar(sq, [](double x, double) { return x; });
    auto rx = bih.solve_with_constraint(gd, gn, cx);
    CHECK(std::abs(rx.lambda) < 1e-8);
    double err = 0.0;
    for (std::size_t id = 0; id < sq.size(); ++id) {
        Vec2 p = sq.nodes[id];
        err = std::max(err, std::abs(rx.psi.v[id] - p.x * p.x));
    }
    CHECK(err < 1e-9);  // exact on quadratics

    // constraint = psi_h itself: orthogonality after the rank-one update
    std::vector<double> gde(sq.boundary.size()), gne(sq.boundary.size(), 0.0);
    for (std::size_t b = 0; b < sq.boundary.size(); ++b) {
        Vec2 p = sq.boundary[b].pos;
        gde[b] = p.x * p.x * p.y;
    }
    ScalarField psi_h = bih.solve(gde, gne, zrhs);
    auto rc = bih.combine(psi_h, bih.particular(psi_h), psi_h);
    CHECK(std::abs(ip_area(rc.psi, psi_h)) <
          1e-8 * std::max(1e-30, l2_area(rc.psi) * l2_area(psi_h)));
}

TEST_CASE("clamped biharmonic on the disk: radial and harmonic-data solutions") {
    // Delta^2 (1-r^2)^2 = 64 with clamped homogeneous data
    double errs[2];
    int k = 0;
    for (int n : {32, 64}) {
        Chart d = disk_chart(n);
        ClampedBiharmonic bih(d);
        std::vector<double> zero(d.boundary.size(), 0.0);
        ScalarField rhs(d, 64.0);
        ScalarField psi = bih.solve(zero, zero, rhs);
        double e = 0.0;
        for (std::size_t id = 0; id < d.size(); ++id) {
            double r2 = d.nodes[id].x * d.nodes[id].x + d.nodes[id].y * d.nodes[id].y;
            double b = 1 - r2;
            e = std::max(e, std::abs(psi.v[id] - b * b));
        }
        errs[k++] = e;
    }
    CHECK(errs[0] / errs[1] > 2.5);
    CHECK(errs[1] < 5e-3);

    // dirichlet 0, neumann A cos(2 theta): psi = -(A/2)(r^2 - r^4) cos(2 theta)
    Chart d = disk_chart(64);
    ClampedBiharmonic bih(d);
    double A = 1.7;
    std::vector<double> gd(d.boundary.size(), 0.0), gn(d.boundary.size());
    for (std::size_t b = 0; b < d.boundary.size(); ++b) {
        Vec2 p = d.boundary[b].pos;
        gn[b] = A * std::cos(2 * std::atan2(p.y, p.x));
    }
    ScalarField zrhs(d);
    ScalarField psi = bih.solve(gd, gn, zrhs);
    double err = 0.0;
    for (std::size_t id = 0; id < d.size(); ++id) {
        Vec2 p = d.nodes[id];
        double r2 = p.x * p.x + p.y * p.y;
        double th = std::atan2(p.y, p.x);
        double exact = -(A / 2) * (r2 - r2 * r2) * std::cos(2 * th);
        err = std::max(err, std::abs(psi.v[id] - exact));
    }
    CHECK(err < 4e-3);
}

TEST_CASE("degenerate constraint is reported") {
    Chart sq = square_chart(24);
    ClampedBiharmonic bih(sq);
    std::vector<double> gd(sq.boundary.size()), gn(sq.boundary.size(), 0.0);
    for (std::size_t b = 0; b < sq.boundary.size(); ++b) gd[b] = sq.boundary[b].pos.x;
    ScalarField zrhs(sq);
    ScalarField psi_h = bih.solve(gd, gn, zrhs);
    // a vanishing particular solution while the homogeneous pairing is
    // nonzero means the orthogonality cannot be enforced
    CHECK_THROWS_AS(bih.combine(psi_h, ScalarField(sq), psi_h), Error);
}

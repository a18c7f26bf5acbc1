#include <catch2/catch_amalgamated.hpp>

#include <linefield/curve.hpp>

#include "oracles.hpp"

using namespace linefield;

TEST_CASE("unit circle geometry at s = 0 and s = L/4") {
    ClosedCurve c = ClosedCurve::circle(1.0);
    REQUIRE(c.length() == Catch::Approx(2.0 * kPi).epsilon(1e-9));

    CurvePoint p0 = c.eval(0.0);
    CHECK(p0.point.x == Catch::Approx(1.0).margin(1e-9));
    CHECK(p0.point.y == Catch::Approx(0.0).margin(1e-9));
    CHECK(p0.tangent.x == Catch::Approx(0.0).margin(1e-9));
    CHECK(p0.tangent.y == Catch::Approx(1.0).margin(1e-9));
    CHECK(p0.normal.x == Catch::Approx(1.0).margin(1e-9));
    CHECK(p0.normal.y == Catch::Approx(0.0).margin(1e-9));
    CHECK(p0.kappa == Catch::Approx(1.0).margin(1e-9));

    CurvePoint pq = c.eval(c.length() / 4.0);
    CHECK(pq.point.x == Catch::Approx(0.0).margin(1e-9));
    CHECK(pq.point.y == Catch::Approx(1.0).margin(1e-9));
    CHECK(pq.tangent.x == Catch::Approx(-1.0).margin(1e-9));
    CHECK(pq.tangent.y == Catch::Approx(0.0).margin(1e-9));
    CHECK(pq.kappa == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("curve closure: eval at 0 and at L coincide") {
    ClosedCurve e = ClosedCurve::ellipse(2.0, 1.0);
    CurvePoint a = e.eval(0.0);
    CurvePoint b = e.eval(e.length());
    CHECK((a.point - b.point).norm() < 1e-9);
}

TEST_CASE("ellipse polyline curvature at the major vertex") {
    // Oracle: kappa = a/b^2 = 2 for a = 2, b = 1.
    double expected = oracles::ellipse_curvature(2.0, 1.0, 0.0);
    REQUIRE(expected == Catch::Approx(2.0));
    std::vector<Vec2> pts;
    for (int i = 0; i < 512; ++i) {
        double t = 2.0 * kPi * i / 512;
        pts.push_back({2.0 * std::cos(t), std::sin(t)});
    }
    ClosedCurve spline = ClosedCurve::polyline(pts);
    // The major vertex (2, 0) is the point of maximum curvature.
    CHECK(spline.max_abs_curvature() == Catch::Approx(expected).epsilon(0.01));
}

TEST_CASE("circle of radius 2 parameterized by angle has length 4 pi") {
    ClosedCurve c = ClosedCurve::circle(2.0);
    double oracle = oracles::brute_force_length(
        [](double t) { return Vec2{2.0 * std::cos(t), 2.0 * std::sin(t)}; },
        2.0 * oracles::kPi, 20000);
    REQUIRE(oracle == Catch::Approx(4.0 * kPi).margin(1e-8));
    CHECK(c.length() == Catch::Approx(4.0 * kPi).margin(1e-6));
}

TEST_CASE("arclength_reparam is the identity on an arclength circle") {
    ClosedCurve c = ClosedCurve::circle(1.0);
    ClosedCurve r = arclength_reparam(c);
    for (int i = 0; i < 64; ++i) {
        double s = c.length() * i / 64.0;
        CHECK((c.eval(s).point - r.eval(s).point).norm() < 1e-9);
    }
}

TEST_CASE("unit speed after reparameterization (rounded square polyline)") {
    std::vector<Vec2> pts;
    auto corner = [](double cx, double cy, double a0, int k, std::vector<Vec2>* out) {
        for (int i = 0; i < k; ++i) {
            double a = a0 + (kPi / 2.0) * i / k;
            out->push_back({cx + 0.3 * std::cos(a), cy + 0.3 * std::sin(a)});
        }
    };
    auto edge = [](Vec2 from, Vec2 to, int k, std::vector<Vec2>* out) {
        for (int i = 0; i < k; ++i)
            out->push_back(from + (to - from) * (static_cast<double>(i) / k));
    };
    corner(0.7, 0.7, 0.0, 24, &pts);
    edge({0.7, 1.0}, {-0.7, 1.0}, 48, &pts);
    corner(-0.7, 0.7, kPi / 2.0, 24, &pts);
    edge({-1.0, 0.7}, {-1.0, -0.7}, 48, &pts);
    corner(-0.7, -0.7, kPi, 24, &pts);
    edge({-0.7, -1.0}, {0.7, -1.0}, 48, &pts);
    corner(0.7, -0.7, 1.5 * kPi, 24, &pts);
    edge({1.0, -0.7}, {1.0, 0.7}, 48, &pts);

    ClosedCurve c = arclength_reparam(ClosedCurve::polyline(pts));
    double L = c.length();
    const double ds = 1e-5;
    for (int i = 0; i < 1024; ++i) {
        double s = L * i / 1024.0;
        double speed = (c.eval(s + ds).point - c.eval(s).point).norm() / ds;
        REQUIRE(speed == Catch::Approx(1.0).margin(1e-6));
    }
}

TEST_CASE("degenerate curves are rejected") {
    CHECK_THROWS_AS(ClosedCurve::polyline({{0, 0}, {0, 0}, {1, 0}}), Error);
    CHECK_THROWS_AS(ClosedCurve::fourier({0.0}, {0.0}, {0.0}, {0.0}), Error);
}

TEST_CASE("cusped curve rejected by arclength_reparam") {
    // Deltoid: gamma'(0) = 0.
    ClosedCurve deltoid =
        ClosedCurve::fourier({0, 2, 1}, {0, 0, 0}, {0, 0, 0}, {0, 2, -1});
    CHECK_THROWS_AS(arclength_reparam(deltoid), Error);
}

TEST_CASE("orientation is normalized to counterclockwise") {
    // Clockwise circle: x = cos t, y = -sin t.
    ClosedCurve cw = ClosedCurve::fourier({0, 1}, {0, 0}, {0, 0}, {0, -1});
    REQUIRE(cw.signed_area() > 0.0);
    // Outward normal at the rightmost point still points along +x.
    double s_right = 0.0;
    double best = 1e300;
    for (int i = 0; i < 512; ++i) {
        double s = cw.length() * i / 512.0;
        double d = (cw.eval(s).point - Vec2{1, 0}).norm();
        if (d < best) {
            best = d;
            s_right = s;
        }
    }
    CurvePoint p = cw.eval(s_right);
    CHECK(p.normal.x == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("rigid transforms rotate points and tangents together") {
    ClosedCurve e = ClosedCurve::ellipse(1.2, 1.0);
    double ang = kPi / 6.0;
    ClosedCurve r = e.transformed(ang, {0.5, -0.25});
    double ca = std::cos(ang), sa = std::sin(ang);
    for (int i = 0; i < 32; ++i) {
        double s = e.length() * i / 32.0;
        CurvePoint p = e.eval(s);
        Vec2 expect{ca * p.point.x - sa * p.point.y + 0.5,
                    sa * p.point.x + ca * p.point.y - 0.25};
        CurvePoint q = r.eval(s);
        CHECK((q.point - expect).norm() < 1e-9);
    }
}

TEST_CASE("nearest-point queries match brute force") {
    ClosedCurve e = ClosedCurve::ellipse(2.0, 1.0);
    CurveDistance dist(e);
    std::vector<Vec2> probes = {{3.0, 0.5}, {0.1, 0.2}, {-1.5, 1.4}, {0.0, -2.0}};
    for (const Vec2& p : probes) {
        double oracle = oracles::brute_force_distance(
            [](double t) { return Vec2{2.0 * std::cos(t), std::sin(t)}; },
            2.0 * oracles::kPi, p);
        CHECK(dist.query(p).distance == Catch::Approx(oracle).margin(1e-6));
    }
}

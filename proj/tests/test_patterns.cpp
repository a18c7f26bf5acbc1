#include <catch2/catch_amalgamated.hpp>

#include <linefield/analysis.hpp>
#include <linefield/patterns.hpp>

#include "oracles.hpp"

using namespace linefield;

namespace {

Domain annulus() { return Domain::tube(ClosedCurve::circle(1.0), 0.4); }

Domain disk() { return Domain::raw(ClosedCurve::circle(1.0)); }

}  // namespace

TEST_CASE("exact tubular solution matches the tangential direction field") {
    double h = 1.0 / 64.0;
    RasterGrid g = RasterGrid::rasterize(annulus(), h);
    LineField f = exact_tubular_solution(annulus(), g);
    double worst = 0.0;
    for (int id = 0; id < g.cell_count(); ++id) {
        size_t s = static_cast<size_t>(id);
        if (!f.valid[s]) continue;
        Vec2 c = g.center(id % g.nx(), id / g.nx());
        worst = std::max(worst,
                         line_distance(f.theta[s], oracles::vortex_theta(c, {0, 0})));
    }
    CHECK(worst < 1e-6);

    CHECK(line_distance(interpolate_theta(f, {1.0, 0.0}), kPi / 2.0) < 1e-3);
    CHECK(line_distance(interpolate_theta(f, {0.0, 0.7}), 0.0) < 1e-3);

    CHECK_THROWS_AS(exact_tubular_solution(disk(), g), Error);
}

TEST_CASE("exact solution: interior eikonal residual below 5h") {
    double h = 1.0 / 64.0;
    RasterGrid g = RasterGrid::rasterize(annulus(), h);
    LineField f = exact_tubular_solution(annulus(), g);
    TensorField2x2 P = to_tensor(f);
    VectorField2 div = divergence_tensor(P, false);
    Region inner = mask_interior(g, f.valid, 10.0);
    double worst = 0.0;
    for (int id = 0; id < g.cell_count(); ++id) {
        size_t s = static_cast<size_t>(id);
        if (!inner[s] || !div.valid[s]) continue;
        worst = std::max(worst, P.at(id).apply(div.at(id)).norm());
    }
    CHECK(worst <= 5.0 * h);
}

TEST_CASE("vortex field values and unit norm") {
    RasterGrid g = RasterGrid::rasterize(disk(), 1.0 / 64.0);
    OrientedField m = vortex_field(g, {0, 0}, 1);
    CHECK(m.max_unit_defect() < 1e-12);
    auto at = [&](Vec2 p) { return interpolate(m.m, p); };
    CHECK((at({0.9, 0.0}) - Vec2{0.0, 1.0}).norm() < 2e-3);
    Vec2 probe = at({0.0, 0.8});
    CHECK((probe - Vec2{-1.0, 0.0}).norm() < 2e-3);

    CHECK_THROWS_AS(vortex_field(g, {0, 0}, 2), Error);
}

TEST_CASE("vortex and exact solution agree as line fields") {
    RasterGrid g = RasterGrid::rasterize(annulus(), 1.0 / 64.0);
    LineField sol = exact_tubular_solution(annulus(), g);
    LineField vort = forget_orientation(vortex_field(g, {0, 0}, 1));
    double worst = 0.0;
    for (int id = 0; id < g.cell_count(); ++id) {
        size_t s = static_cast<size_t>(id);
        if (!sol.valid[s] || !vort.valid[s]) continue;
        worst = std::max(worst, line_distance(sol.theta[s], vort.theta[s]));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("u-turn pattern: values and half-integer winding") {
    RasterGrid g = RasterGrid::rasterize(disk(), 1.0 / 64.0);
    LineField f = uturn_field(g, {0, 0});
    CHECK(line_distance(interpolate_theta(f, {0.0, 0.5}), 0.0) < 1e-2);
    CHECK(line_distance(interpolate_theta(f, {0.3, -0.5}), kPi / 2.0) < 1e-9);

    // Winding around the center is +1/2 (brute-force oracle first).
    double oracle = oracles::brute_force_winding(
        [](Vec2 p) { return oracles::uturn_theta(p, {0, 0}); }, {0, 0}, 0.4);
    REQUIRE(oracle == Catch::Approx(0.5).margin(1e-9));
    double w = winding_number(f, rect_loop_around(g, {0, 0}, 0.4));
    CHECK(w == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("grain boundary: line singularity signatures") {
    double h = 1.0 / 64.0;
    RasterGrid g = RasterGrid::rasterize(disk(), h);
    LineField f = grain_boundary_field(g, 0.0, kPi / 2.0, {0.0, 0.0}, {0.0, 1.0});
    VectorField2 div = divergence_tensor(to_tensor(f), true);
    // Divergence mass concentrates within one cell of the interface.
    for (int id = 0; id < g.cell_count(); ++id) {
        size_t s = static_cast<size_t>(id);
        Vec2 c = g.center(id % g.nx(), id / g.nx());
        if (std::abs(c.x) > 1.5 * h && g.inside(id) &&
            g.boundary_distance(id) > 3.0 * h)
            REQUIRE(std::hypot(div.x[s], div.y[s]) < 1e-9);
    }

    // L2 grows like h^{-1/2}, L1 stays bounded (band of width ~h, values ~1/h).
    auto norms_at = [&](double hh) {
        RasterGrid gh = RasterGrid::rasterize(disk(), hh);
        LineField fh = grain_boundary_field(gh, 0.0, kPi / 2.0, {0.0, 0.0}, {0.0, 1.0});
        VectorField2 dv = divergence_tensor(to_tensor(fh), false);
        Region reg = region_and(interior_region(gh, 4.0), dv.valid);
        return std::pair<double, double>{lp_norm(dv, 2.0, reg), lp_norm(dv, 1.0, reg)};
    };
    auto [l2a, l1a] = norms_at(1.0 / 32.0);
    auto [l2b, l1b] = norms_at(1.0 / 64.0);
    auto [l2c, l1c] = norms_at(1.0 / 128.0);
    CHECK(l2b / l2a == Catch::Approx(std::sqrt(2.0)).epsilon(0.15));
    CHECK(l2c / l2b == Catch::Approx(std::sqrt(2.0)).epsilon(0.15));
    CHECK(l1b / l1a == Catch::Approx(1.0).epsilon(0.15));
    CHECK(l1c / l1b == Catch::Approx(1.0).epsilon(0.15));

    CHECK_THROWS_AS(grain_boundary_field(g, 0.3, 0.3, {0, 0}, {0, 1}), Error);
}

TEST_CASE("constant field: exact entries and zero divergence") {
    RasterGrid g = RasterGrid::rasterize(disk(), 1.0 / 32.0);
    LineField f = constant_field(g, 0.0);
    for (int id = 0; id < g.cell_count(); ++id) {
        size_t s = static_cast<size_t>(id);
        if (!f.valid[s]) continue;
        ProjectionEntries e = f.entries(id);
        REQUIRE(e.a == 1.0);
        REQUIRE(e.b == 0.0);
        REQUIRE(e.c == 0.0);
    }
    VectorField2 div = divergence_tensor(to_tensor(f), false);
    TensorField2x2 P = to_tensor(f);
    for (int id = 0; id < g.cell_count(); ++id) {
        size_t s = static_cast<size_t>(id);
        if (!div.valid[s]) continue;
        REQUIRE(P.at(id).apply(div.at(id)).norm() == 0.0);
    }
}

TEST_CASE("projection invariants hold across the pattern catalog") {
    RasterGrid g = RasterGrid::rasterize(disk(), 1.0 / 48.0);
    std::vector<LineField> catalog;
    catalog.push_back(constant_field(g, 1.1));
    catalog.push_back(forget_orientation(vortex_field(g, {0, 0}, -1)));
    catalog.push_back(uturn_field(g, {0, 0}));
    catalog.push_back(grain_boundary_field(g, 0.2, 1.1, {0.1, 0}, {0, 1}));
    RasterGrid ga = RasterGrid::rasterize(annulus(), 1.0 / 48.0);
    catalog.push_back(exact_tubular_solution(annulus(), ga));
    for (const LineField& f : catalog) {
        ProjectionDefects d = projection_defects(to_tensor(f));
        CHECK(d.projection <= 1e-12);
        CHECK(d.symmetry == 0.0);
        CHECK(d.trace <= 1e-12);
        CHECK(d.det <= 1e-12);
        for (int id = 0; id < f.grid->cell_count(); ++id) {
            size_t s = static_cast<size_t>(id);
            if (!f.valid[s]) continue;
            ProjectionEntries e = f.entries(id);
            REQUIRE(e.a + e.c == 1.0);  // c is stored as 1 - a
            REQUIRE(std::abs(e.b * e.b - e.a * e.c) <= 1e-12);
            REQUIRE((f.theta[s] >= 0.0 && f.theta[s] < kPi));
        }
    }
}

TEST_CASE("exact solution is equivariant under rigid motions") {
    double h = 1.0 / 64.0;
    double ang = kPi / 6.0;
    Domain base = Domain::tube(ClosedCurve::ellipse(1.2, 1.0), 0.3);
    Domain rot = Domain::tube(ClosedCurve::ellipse(1.2, 1.0).transformed(ang, {0, 0}), 0.3);
    RasterGrid g1 = RasterGrid::rasterize(base, h);
    RasterGrid g2 = RasterGrid::rasterize(rot, h);
    LineField f1 = exact_tubular_solution(base, g1);
    LineField f2 = exact_tubular_solution(rot, g2);
    double ca = std::cos(ang), sa = std::sin(ang);
    double worst = 0.0;
    int compared = 0;
    for (int id = 0; id < g1.cell_count(); ++id) {
        size_t s = static_cast<size_t>(id);
        if (!f1.valid[s]) continue;
        Vec2 c = g1.center(id % g1.nx(), id / g1.nx());
        Vec2 rc{ca * c.x - sa * c.y, sa * c.x + ca * c.y};
        double t2;
        try {
            t2 = interpolate_theta(f2, rc);
        } catch (const Error&) {
            continue;
        }
        worst = std::max(worst, line_distance(t2, f1.theta[s] + ang));
        ++compared;
    }
    REQUIRE(compared > 1000);
    CHECK(worst <= 5.0 * h);
}

TEST_CASE("interpolate_theta crosses the 0/pi wrap smoothly") {
    BBox box;
    box.expand({0, 0});
    box.expand({1, 1});
    RasterGrid g = RasterGrid::rectangle(box, 1.0 / 32.0);
    // Nearly-horizontal directions on both sides of the wrap.
    LineField f = LineField::on(g);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            size_t id = static_cast<size_t>(g.index(i, j));
            f.theta[id] = canonical_theta((i % 2 == 0) ? 0.05 : kPi - 0.05);
        }
    double t = interpolate_theta(f, {0.5, 0.5});
    CHECK(line_distance(t, 0.0) < 0.06);
}

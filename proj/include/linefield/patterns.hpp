#pragma once

// Unoriented line fields and the canonical analytic patterns: the exact
// solution on tubular domains (tangent of the nearest core point), the
// vortex / target pattern, the U-turn pattern, grain boundaries, and
// constant fields.
//
// A LineField stores the canonical angle theta in [0, pi) per cell; the
// projection entries are derived as a = cos^2 theta, c = 1 - a (so a + c = 1
// exactly as stored) and b = sin theta cos theta.

#include "grid.hpp"

namespace linefield {

struct ProjectionEntries {
    double a, b, c;
};

struct LineField {
    const RasterGrid* grid = nullptr;
    std::vector<double> theta;
    std::vector<std::uint8_t> valid;

    static LineField on(const RasterGrid& g) {
        LineField f;
        f.grid = &g;
        f.theta.assign(static_cast<size_t>(g.cell_count()), 0.0);
        f.valid.assign(static_cast<size_t>(g.cell_count()), 0);
        for (int id = 0; id < g.cell_count(); ++id)
            f.valid[static_cast<size_t>(id)] = g.inside(id) ? 1 : 0;
        return f;
    }

    ProjectionEntries entries(int id) const {
        double t = theta[static_cast<size_t>(id)];
        double ct = std::cos(t), st = std::sin(t);
        double a = ct * ct;
        return {a, st * ct, 1.0 - a};
    }

    Mat2 projection(int id) const {
        ProjectionEntries e = entries(id);
        return {e.a, e.b, e.b, e.c};
    }

    // Unoriented direction of the range of P.
    Vec2 direction(int id) const {
        double t = theta[static_cast<size_t>(id)];
        return {std::cos(t), std::sin(t)};
    }
};

struct OrientedField {
    VectorField2 m;

    static OrientedField on(const RasterGrid& g) { return {VectorField2::on(g)}; }

    double max_unit_defect() const {
        double d = 0.0;
        for (size_t i = 0; i < m.valid.size(); ++i)
            if (m.valid[i])
                d = std::max(d, std::abs(std::hypot(m.x[i], m.y[i]) - 1.0));
        return d;
    }
};

inline TensorField2x2 to_tensor(const LineField& f) {
    TensorField2x2 P = TensorField2x2::on(*f.grid);
    P.valid = f.valid;
    for (int id = 0; id < f.grid->cell_count(); ++id) {
        size_t s = static_cast<size_t>(id);
        if (!f.valid[s]) continue;
        ProjectionEntries e = f.entries(id);
        P.xx[s] = e.a;
        P.xy[s] = e.b;
        P.yx[s] = e.b;
        P.yy[s] = e.c;
    }
    return P;
}

inline LineField forget_orientation(const OrientedField& of) {
    LineField f = LineField::on(*of.m.grid);
    f.valid = of.m.valid;
    for (size_t i = 0; i < f.valid.size(); ++i)
        if (f.valid[i])
            f.theta[i] = canonical_theta(std::atan2(of.m.y[i], of.m.x[i]));
    return f;
}

// Largest per-cell defects of the projection laws P^2 = P, P = P^T,
// tr P = 1, det P = 0 over the valid cells of a tensor field.
struct ProjectionDefects {
    double projection = 0.0;  // max |P^2 - P|
    double symmetry = 0.0;    // max |P_xy - P_yx|
    double trace = 0.0;       // max |tr P - 1|
    double det = 0.0;         // max |det P|
};

inline ProjectionDefects projection_defects(const TensorField2x2& P) {
    ProjectionDefects d;
    for (int id = 0; id < P.grid->cell_count(); ++id) {
        size_t s = static_cast<size_t>(id);
        if (!P.valid[s]) continue;
        Mat2 M = P.at(id);
        d.projection = std::max(d.projection, (M.mul(M) - M).max_abs());
        d.symmetry = std::max(d.symmetry, std::abs(M.xy - M.yx));
        d.trace = std::max(d.trace, std::abs(M.trace() - 1.0));
        d.det = std::max(d.det, std::abs(M.det()));
    }
    return d;
}

// pi-periodic interpolation of theta via the doubled-angle vector
// (cos 2theta, sin 2theta); this is the shortest-path blend mod pi and is
// stable across the 0/pi wrap.
inline double interpolate_theta(const LineField& f, const Vec2& p) {
    const RasterGrid& g = *f.grid;
    auto s = detail::bilinear_stencil(g, f.valid, p);
    if (!s.ok)
        throw Error(ErrorKind::Interpolation,
                    "interpolate_theta: point outside valid stencil");
    double u = 0.0, v = 0.0;
    double wx[2] = {1.0 - s.fx, s.fx};
    double wy[2] = {1.0 - s.fy, s.fy};
    for (int dj = 0; dj <= 1; ++dj)
        for (int di = 0; di <= 1; ++di) {
            double t = f.theta[static_cast<size_t>(g.index(s.i0 + di, s.j0 + dj))];
            double w = wx[di] * wy[dj];
            u += w * std::cos(2.0 * t);
            v += w * std::sin(2.0 * t);
        }
    return canonical_theta(0.5 * std::atan2(v, u));
}

// ======================================================================
// Pattern constructors
// ======================================================================

inline LineField constant_field(const RasterGrid& g, double theta) {
    LineField f = LineField::on(g);
    double t = canonical_theta(theta);
    for (size_t i = 0; i < f.valid.size(); ++i)
        if (f.valid[i]) f.theta[i] = t;
    return f;
}

// The unique solution on a tubular domain: theta at x is the direction of
// the core tangent at the nearest core point (the inverse of
// Psi(s,t) = gamma(s) - t n(s)).
inline LineField exact_tubular_solution(const Domain& domain, const RasterGrid& g) {
    if (domain.kind() != Domain::Kind::Tube)
        throw Error(ErrorKind::Validation,
                    "exact_tubular_solution requires a tubular domain");
    LineField f = LineField::on(g);
    const ClosedCurve& core = domain.core();
    double reach = 1.0 / std::max(core.max_abs_curvature(), 1e-12);
    CurveDistance dist(core);
    parallel_for(g.ny(), [&](int jb, int je) {
        for (int j = jb; j < je; ++j) {
            CurveDistance::Hint hint;
            for (int i = 0; i < g.nx(); ++i) {
                int id = g.index(i, j);
                if (!f.valid[static_cast<size_t>(id)]) continue;
                CurveDistance::Result q = dist.query(g.center(i, j), &hint);
                if (q.distance >= reach)
                    throw Error(ErrorKind::Internal,
                                "nearest-point projection left the tubular reach");
                Vec2 tangent = core.eval_raw(q.t).d1;
                f.theta[static_cast<size_t>(id)] =
                    canonical_theta(std::atan2(tangent.y, tangent.x));
            }
        }
    });
    return f;
}

// m(x) = alpha (x - x0)^perp / |x - x0|; cells within 2h of the center are
// masked out.
inline OrientedField vortex_field(const RasterGrid& g, Vec2 center, int alpha) {
    if (alpha != 1 && alpha != -1)
        throw Error(ErrorKind::Validation, "vortex_field: alpha must be +-1");
    OrientedField of = OrientedField::on(g);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            size_t id = static_cast<size_t>(g.index(i, j));
            if (!of.m.valid[id]) continue;
            Vec2 r = g.center(i, j) - center;
            double n = r.norm();
            if (n < 2.0 * g.h()) {
                of.m.valid[id] = 0;
                continue;
            }
            Vec2 m = r.perp() * (static_cast<double>(alpha) / n);
            of.m.x[id] = m.x;
            of.m.y[id] = m.y;
        }
    return of;
}

// Concentric arcs about the center in the upper half plane continuing into
// vertical stripes below; carries a +1/2 disclination at the center (core
// masked within 2h, as for the vortex).
inline LineField uturn_field(const RasterGrid& g, Vec2 center) {
    LineField f = LineField::on(g);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            size_t id = static_cast<size_t>(g.index(i, j));
            if (!f.valid[id]) continue;
            Vec2 c = g.center(i, j);
            Vec2 r = c - center;
            if (r.norm() < 2.0 * g.h()) {
                f.valid[id] = 0;
                continue;
            }
            if (c.y > center.y)
                f.theta[id] = canonical_theta(std::atan2(r.y, r.x) + kPi / 2.0);
            else
                f.theta[id] = kPi / 2.0;
        }
    return f;
}

// Piecewise-constant line field jumping across the directed line through
// line_point with direction line_dir (theta_left on the left of the line).
inline LineField grain_boundary_field(const RasterGrid& g, double theta_left,
                                      double theta_right, Vec2 line_point,
                                      Vec2 line_dir) {
    if (line_distance(theta_left, theta_right) < 1e-12)
        throw Error(ErrorKind::Validation,
                    "grain_boundary_field: the two directions coincide");
    LineField f = LineField::on(g);
    double tl = canonical_theta(theta_left), tr = canonical_theta(theta_right);
    Vec2 d = line_dir.normalized();
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            size_t id = static_cast<size_t>(g.index(i, j));
            if (!f.valid[id]) continue;
            double side = d.cross(g.center(i, j) - line_point);
            f.theta[id] = side > 0.0 ? tl : tr;
        }
    return f;
}

}  // namespace linefield

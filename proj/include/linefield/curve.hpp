#pragma once

// Closed planar curves with two representations (truncated Fourier series
// and periodic cubic splines through a closed polyline), arclength
// parameterization, exact-derivative curvature, and warm-started
// nearest-point queries.
//
// Conventions: curves are stored counterclockwise (auto-detected and fixed
// at construction); the outward unit normal is the tangent rotated -90deg.

#include <cassert>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "core.hpp"

namespace linefield {

struct CurvePoint {
    Vec2 point;
    Vec2 tangent;   // unit
    Vec2 normal;    // outward unit (tangent rotated -90deg)
    double kappa = 0.0;
};

namespace detail {

struct RawEval {
    Vec2 p;
    Vec2 d1;
    Vec2 d2;
};

// x(t) = ax[0] + sum_k ax[k] cos(kt) + bx[k] sin(kt), t in [0, 2pi).
struct FourierRep {
    std::vector<double> ax, bx, ay, by;

    double period() const { return 2.0 * kPi; }

    RawEval eval(double t) const {
        RawEval r;
        r.p = {ax.empty() ? 0.0 : ax[0], ay.empty() ? 0.0 : ay[0]};
        size_t n = std::max(std::max(ax.size(), bx.size()),
                            std::max(ay.size(), by.size()));
        for (size_t k = 1; k < n; ++k) {
            double kk = static_cast<double>(k);
            double c = std::cos(kk * t), s = std::sin(kk * t);
            double axk = k < ax.size() ? ax[k] : 0.0;
            double bxk = k < bx.size() ? bx[k] : 0.0;
            double ayk = k < ay.size() ? ay[k] : 0.0;
            double byk = k < by.size() ? by[k] : 0.0;
            r.p.x += axk * c + bxk * s;
            r.p.y += ayk * c + byk * s;
            r.d1.x += kk * (-axk * s + bxk * c);
            r.d1.y += kk * (-ayk * s + byk * c);
            r.d2.x += kk * kk * (-axk * c - bxk * s);
            r.d2.y += kk * kk * (-ayk * c - byk * s);
        }
        return r;
    }

    void reverse() {
        for (auto& v : bx) v = -v;
        for (auto& v : by) v = -v;
    }
};

// Cyclic tridiagonal solve (Sherman-Morrison) for the periodic spline
// second derivatives. diag/sub/sup have size n; sub[i] couples i with i-1
// (sub[0] is the wrap term), sup[i] couples i with i+1 (sup[n-1] wraps).
inline std::vector<Vec2> solve_cyclic_tridiag(const std::vector<double>& sub,
                                              const std::vector<double>& diag,
                                              const std::vector<double>& sup,
                                              std::vector<Vec2> rhs) {
    int n = static_cast<int>(diag.size());
    auto thomas = [&](const std::vector<double>& d, std::vector<Vec2> r) {
        std::vector<double> c(static_cast<size_t>(n), 0.0);
        c[0] = sup[0] / d[0];
        r[0] = r[0] / d[0];
        for (int i = 1; i < n; ++i) {
            double m = d[static_cast<size_t>(i)] -
                       sub[static_cast<size_t>(i)] * c[static_cast<size_t>(i - 1)];
            if (i < n - 1) c[static_cast<size_t>(i)] = sup[static_cast<size_t>(i)] / m;
            r[static_cast<size_t>(i)] =
                (r[static_cast<size_t>(i)] -
                 r[static_cast<size_t>(i - 1)] * sub[static_cast<size_t>(i)]) / m;
        }
        for (int i = n - 2; i >= 0; --i)
            r[static_cast<size_t>(i)] -=
                r[static_cast<size_t>(i + 1)] * c[static_cast<size_t>(i)];
        return r;
    };

    double alpha = sub[0];        // couples row 0 with row n-1
    double beta = sup.back();     // couples row n-1 with row 0
    double gamma = -diag[0];
    std::vector<double> d = diag;
    d[0] -= gamma;
    d[static_cast<size_t>(n - 1)] -= alpha * beta / gamma;

    // Correction vector acts identically on x and y; solve with Vec2 payload.
    std::vector<Vec2> z(static_cast<size_t>(n), Vec2{0, 0});
    z[0] = {gamma, gamma};
    z[static_cast<size_t>(n - 1)] = {beta, beta};

    std::vector<Vec2> y = thomas(d, std::move(rhs));
    std::vector<Vec2> q = thomas(d, std::move(z));
    double fact_x = (y[0].x + alpha * y[static_cast<size_t>(n - 1)].x / gamma) /
                    (1.0 + q[0].x + alpha * q[static_cast<size_t>(n - 1)].x / gamma);
    double fact_y = (y[0].y + alpha * y[static_cast<size_t>(n - 1)].y / gamma) /
                    (1.0 + q[0].y + alpha * q[static_cast<size_t>(n - 1)].y / gamma);
    for (int i = 0; i < n; ++i) {
        y[static_cast<size_t>(i)].x -= fact_x * q[static_cast<size_t>(i)].x;
        y[static_cast<size_t>(i)].y -= fact_y * q[static_cast<size_t>(i)].y;
    }
    return y;
}

// Periodic cubic spline with chord-length knots.
struct SplineRep {
    std::vector<Vec2> pts;     // closed: pts[M] wraps to pts[0]
    std::vector<double> knots; // size M+1, knots[0]=0, knots[M]=period
    std::vector<Vec2> m2;      // second derivatives at knots, size M+1 (wrap)

    double period() const { return knots.back(); }

    void build() {
        int m = static_cast<int>(pts.size());
        if (m < 3) throw Error(ErrorKind::InvalidCurve, "polyline needs >= 3 points");
        knots.assign(static_cast<size_t>(m + 1), 0.0);
        for (int i = 0; i < m; ++i) {
            Vec2 a = pts[static_cast<size_t>(i)];
            Vec2 b = pts[static_cast<size_t>((i + 1) % m)];
            double len = (b - a).norm();
            if (len < 1e-12)
                throw Error(ErrorKind::InvalidCurve,
                            "degenerate polyline: repeated consecutive point");
            knots[static_cast<size_t>(i + 1)] = knots[static_cast<size_t>(i)] + len;
        }
        std::vector<double> sub(static_cast<size_t>(m)), diag(static_cast<size_t>(m)),
            sup(static_cast<size_t>(m));
        std::vector<Vec2> rhs(static_cast<size_t>(m));
        auto h = [&](int i) {  // knot spacing of interval i (mod m)
            int k = ((i % m) + m) % m;
            return knots[static_cast<size_t>(k + 1)] - knots[static_cast<size_t>(k)];
        };
        for (int i = 0; i < m; ++i) {
            double hm = h(i - 1), hp = h(i);
            Vec2 pm = pts[static_cast<size_t>((i - 1 + m) % m)];
            Vec2 p0 = pts[static_cast<size_t>(i)];
            Vec2 pp = pts[static_cast<size_t>((i + 1) % m)];
            sub[static_cast<size_t>(i)] = hm / 6.0;
            diag[static_cast<size_t>(i)] = (hm + hp) / 3.0;
            sup[static_cast<size_t>(i)] = hp / 6.0;
            rhs[static_cast<size_t>(i)] = (pp - p0) / hp - (p0 - pm) / hm;
        }
        std::vector<Vec2> sol = solve_cyclic_tridiag(sub, diag, sup, std::move(rhs));
        m2.assign(static_cast<size_t>(m + 1), Vec2{0, 0});
        for (int i = 0; i < m; ++i) m2[static_cast<size_t>(i)] = sol[static_cast<size_t>(i)];
        m2[static_cast<size_t>(m)] = sol[0];
    }

    RawEval eval(double t) const {
        int m = static_cast<int>(pts.size());
        double T = period();
        t = std::fmod(t, T);
        if (t < 0) t += T;
        // locate interval
        int lo = 0, hi = m;
        while (hi - lo > 1) {
            int mid = (lo + hi) / 2;
            if (knots[static_cast<size_t>(mid)] <= t) lo = mid; else hi = mid;
        }
        int i = lo;
        double t0 = knots[static_cast<size_t>(i)], t1 = knots[static_cast<size_t>(i + 1)];
        double hh = t1 - t0;
        Vec2 p0 = pts[static_cast<size_t>(i)];
        Vec2 p1 = pts[static_cast<size_t>((i + 1) % m)];
        Vec2 M0 = m2[static_cast<size_t>(i)], M1 = m2[static_cast<size_t>(i + 1)];
        double A = (t1 - t), B = (t - t0);
        RawEval r;
        r.p = M0 * (A * A * A / (6 * hh)) + M1 * (B * B * B / (6 * hh)) +
              (p0 / hh - M0 * (hh / 6)) * A + (p1 / hh - M1 * (hh / 6)) * B;
        r.d1 = M0 * (-A * A / (2 * hh)) + M1 * (B * B / (2 * hh)) +
               (p1 - p0) / hh - (M1 - M0) * (hh / 6);
        r.d2 = M0 * (A / hh) + M1 * (B / hh);
        return r;
    }

    void reverse() {
        std::reverse(pts.begin(), pts.end());
        build();
    }
};

// 5-point Gauss-Legendre on [a, b].
template <typename F>
double gauss5(const F& f, double a, double b) {
    static const double X[5] = {0.0, 0.5384693101056831, -0.5384693101056831,
                                0.9061798459386640, -0.9061798459386640};
    static const double W[5] = {0.5688888888888889, 0.4786286704993665,
                                0.4786286704993665, 0.2369268850561891,
                                0.2369268850561891};
    double c = 0.5 * (a + b), hw = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 5; ++i) s += W[i] * f(c + hw * X[i]);
    return s * hw;
}

}  // namespace detail

// ======================================================================
// ClosedCurve
// ======================================================================

class ClosedCurve {
public:
    static ClosedCurve fourier(std::vector<double> ax, std::vector<double> bx,
                               std::vector<double> ay, std::vector<double> by) {
        ClosedCurve c;
        c.rep_ = detail::FourierRep{std::move(ax), std::move(bx), std::move(ay),
                                    std::move(by)};
        c.finalize();
        return c;
    }

    static ClosedCurve polyline(std::vector<Vec2> points) {
        ClosedCurve c;
        detail::SplineRep rep;
        rep.pts = std::move(points);
        rep.build();
        c.rep_ = std::move(rep);
        c.finalize();
        return c;
    }

    static ClosedCurve circle(double radius, Vec2 center = {0, 0}) {
        return fourier({center.x, radius}, {0, 0}, {center.y, 0}, {0, radius});
    }

    static ClosedCurve ellipse(double a, double b, Vec2 center = {0, 0}) {
        return fourier({center.x, a}, {0, 0}, {center.y, 0}, {0, b});
    }

    // Two semicircular caps of the given radius joined by straight segments
    // of length 2*half_straight, sampled as a closed polyline.
    static ClosedCurve stadium(double cap_radius, double half_straight,
                               int samples_per_arc = 64) {
        std::vector<Vec2> pts;
        int ns = samples_per_arc;
        for (int i = 0; i < ns; ++i) {  // right cap, -90deg -> +90deg
            double a = -kPi / 2 + kPi * i / ns;
            pts.push_back({half_straight + cap_radius * std::cos(a),
                           cap_radius * std::sin(a)});
        }
        for (int i = 0; i < ns; ++i) {  // top straight, right -> left
            double x = half_straight - 2 * half_straight * i / ns;
            pts.push_back({x, cap_radius});
        }
        for (int i = 0; i < ns; ++i) {  // left cap
            double a = kPi / 2 + kPi * i / ns;
            pts.push_back({-half_straight + cap_radius * std::cos(a),
                           cap_radius * std::sin(a)});
        }
        for (int i = 0; i < ns; ++i) {  // bottom straight, left -> right
            double x = -half_straight + 2 * half_straight * i / ns;
            pts.push_back({x, -cap_radius});
        }
        return polyline(std::move(pts));
    }

    double length() const { return length_; }
    double param_period() const {
        return std::visit([](const auto& r) { return r.period(); }, rep_);
    }

    detail::RawEval eval_raw(double t) const {
        return std::visit([&](const auto& r) { return r.eval(t); }, rep_);
    }

    // Arclength evaluation. s wraps periodically.
    CurvePoint eval(double s) const {
        double t = param_from_arclength(s);
        return eval_at_param(t);
    }

    CurvePoint eval_at_param(double t) const {
        detail::RawEval r = eval_raw(t);
        double speed = r.d1.norm();
        if (speed < 1e-12)
            throw Error(ErrorKind::InvalidCurve, "degenerate curve: |gamma'| < 1e-12");
        CurvePoint cp;
        cp.point = r.p;
        cp.tangent = r.d1 / speed;
        cp.normal = {cp.tangent.y, -cp.tangent.x};
        cp.kappa = r.d1.cross(r.d2) / (speed * speed * speed);
        return cp;
    }

    // Inverse of the cumulative arclength map.
    double param_from_arclength(double s) const {
        double L = length_;
        s = std::fmod(s, L);
        if (s < 0) s += L;
        size_t lo = 0, hi = arc_.size() - 1;
        while (hi - lo > 1) {
            size_t mid = (lo + hi) / 2;
            if (arc_[mid] <= s) lo = mid; else hi = mid;
        }
        double T = param_period();
        double dt = T / static_cast<double>(arc_.size() - 1);
        double t0 = dt * static_cast<double>(lo);
        double frac = (s - arc_[lo]) / std::max(arc_[lo + 1] - arc_[lo], 1e-300);
        double t = t0 + frac * dt;
        auto speed = [&](double tt) { return eval_raw(tt).d1.norm(); };
        for (int it = 0; it < 3; ++it) {
            double F = arc_[lo] + detail::gauss5(speed, t0, t) - s;
            double dF = speed(t);
            t -= F / dF;
            t = std::clamp(t, t0 - dt, t0 + 2 * dt);
        }
        return t;
    }

    double max_abs_curvature() const { return max_kappa_; }

    double signed_area() const { return signed_area_; }

    BBox bounding_box() const { return bbox_; }

    ClosedCurve transformed(double rot_angle, Vec2 translation) const {
        double c = std::cos(rot_angle), s = std::sin(rot_angle);
        ClosedCurve out;
        if (std::holds_alternative<detail::FourierRep>(rep_)) {
            const auto& f = std::get<detail::FourierRep>(rep_);
            size_t n = std::max(std::max(f.ax.size(), f.bx.size()),
                                std::max(f.ay.size(), f.by.size()));
            detail::FourierRep g;
            g.ax.assign(n, 0.0); g.bx.assign(n, 0.0);
            g.ay.assign(n, 0.0); g.by.assign(n, 0.0);
            for (size_t k = 0; k < n; ++k) {
                double axk = k < f.ax.size() ? f.ax[k] : 0.0;
                double bxk = k < f.bx.size() ? f.bx[k] : 0.0;
                double ayk = k < f.ay.size() ? f.ay[k] : 0.0;
                double byk = k < f.by.size() ? f.by[k] : 0.0;
                g.ax[k] = c * axk - s * ayk;
                g.ay[k] = s * axk + c * ayk;
                g.bx[k] = c * bxk - s * byk;
                g.by[k] = s * bxk + c * byk;
            }
            g.ax[0] += translation.x;
            g.ay[0] += translation.y;
            out.rep_ = std::move(g);
        } else {
            const auto& sp = std::get<detail::SplineRep>(rep_);
            detail::SplineRep g;
            g.pts.reserve(sp.pts.size());
            for (const Vec2& p : sp.pts)
                g.pts.push_back({c * p.x - s * p.y + translation.x,
                                 s * p.x + c * p.y + translation.y});
            g.build();
            out.rep_ = std::move(g);
        }
        out.finalize();
        return out;
    }

    // Dense uniform-parameter cache used by nearest-point search.
    const std::vector<Vec2>& dense_points() const { return dense_pts_; }
    double dense_dt() const { return param_period() / static_cast<double>(dense_pts_.size()); }

private:
    void finalize() {
        const int N = 2048;
        double T = param_period();
        // Degeneracy scan + orientation.
        double area = 0.0, min_speed = 1e300;
        for (int i = 0; i < N; ++i) {
            double t = T * (static_cast<double>(i) + 0.5) / N;
            detail::RawEval r = eval_raw(t);
            min_speed = std::min(min_speed, r.d1.norm());
            area += r.p.cross(r.d1);
        }
        area *= 0.5 * T / N;
        if (min_speed < 1e-12)
            throw Error(ErrorKind::InvalidCurve, "degenerate curve: |gamma'| < 1e-12");
        if (area < 0.0) {
            std::visit([](auto& r) { r.reverse(); }, rep_);
            area = -area;
        }
        signed_area_ = area;

        arc_.assign(N + 1, 0.0);
        auto speed = [&](double tt) { return eval_raw(tt).d1.norm(); };
        for (int i = 0; i < N; ++i) {
            double a = T * static_cast<double>(i) / N;
            double b = T * static_cast<double>(i + 1) / N;
            arc_[static_cast<size_t>(i + 1)] =
                arc_[static_cast<size_t>(i)] + detail::gauss5(speed, a, b);
        }
        length_ = arc_.back();

        dense_pts_.resize(N);
        bbox_ = BBox{};
        double mk = 0.0;
        int arg_mk = 0;
        for (int i = 0; i < N; ++i) {
            double t = T * static_cast<double>(i) / N;
            detail::RawEval r = eval_raw(t);
            dense_pts_[static_cast<size_t>(i)] = r.p;
            bbox_.expand(r.p);
            double sp = r.d1.norm();
            double k = std::abs(r.d1.cross(r.d2)) / (sp * sp * sp);
            if (k > mk) { mk = k; arg_mk = i; }
        }
        // Golden-section refinement of the curvature peak.
        double lo = T * (arg_mk - 1.0) / N, hi = T * (arg_mk + 1.0) / N;
        auto negk = [&](double t) {
            detail::RawEval r = eval_raw(t);
            double sp = r.d1.norm();
            return -std::abs(r.d1.cross(r.d2)) / (sp * sp * sp);
        };
        const double gr = 0.6180339887498949;
        double a = lo, b = hi;
        double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
        double f1 = negk(c1), f2 = negk(c2);
        for (int it = 0; it < 40; ++it) {
            if (f1 < f2) { b = c2; c2 = c1; f2 = f1; c1 = b - gr * (b - a); f1 = negk(c1); }
            else { a = c1; c1 = c2; f1 = f2; c2 = a + gr * (b - a); f2 = negk(c2); }
        }
        max_kappa_ = std::max(mk, -std::min(f1, f2));
    }

    std::variant<detail::FourierRep, detail::SplineRep> rep_;
    std::vector<double> arc_;       // cumulative arclength at uniform params
    std::vector<Vec2> dense_pts_;   // gamma at uniform params
    double length_ = 0.0;
    double max_kappa_ = 0.0;
    double signed_area_ = 0.0;
    BBox bbox_;
};

// Returns a curve whose eval() is arclength-parameterized. Construction
// already builds the arclength table, so this re-validates regularity and
// returns a copy; a cusp (vanishing speed) is rejected.
inline ClosedCurve arclength_reparam(const ClosedCurve& curve) {
    const int probes = 4096;
    double T = curve.param_period();
    for (int i = 0; i < probes; ++i) {
        double t = T * static_cast<double>(i) / probes;
        if (curve.eval_raw(t).d1.norm() < 1e-9 * curve.length() / T)
            throw Error(ErrorKind::InvalidCurve, "cusp detected: curve not regular");
    }
    return curve;
}

// ======================================================================
// Nearest-point queries
// ======================================================================

// Warm-startable nearest-point search against a ClosedCurve. A coarse
// global scan guards against basin switches near the medial axis; the local
// window plus Newton refinement gives ~1e-10 accuracy in the distance.
class CurveDistance {
public:
    struct Hint {
        int idx = -1;
    };
    struct Result {
        double distance = 0.0;
        double t = 0.0;      // raw parameter of the closest point
        Vec2 closest;
        Vec2 delta;          // p - closest
    };

    explicit CurveDistance(const ClosedCurve& curve) : curve_(&curve) {}

    Result query(const Vec2& p, Hint* hint = nullptr) const {
        const std::vector<Vec2>& pts = curve_->dense_points();
        int n = static_cast<int>(pts.size());
        auto d2at = [&](int i) {
            const Vec2& q = pts[static_cast<size_t>(((i % n) + n) % n)];
            return (p - q).norm2();
        };

        int best = -1;
        double bestd = 1e300;
        const int stride = 16;
        for (int i = 0; i < n; i += stride) {
            double d = d2at(i);
            if (d < bestd) { bestd = d; best = i; }
        }
        if (hint && hint->idx >= 0) {
            for (int i = hint->idx - 8; i <= hint->idx + 8; ++i) {
                double d = d2at(i);
                if (d < bestd) { bestd = d; best = ((i % n) + n) % n; }
            }
        }
        // local descent around the coarse winner
        for (int w = stride; w >= 1; w /= 2) {
            bool moved = true;
            while (moved) {
                moved = false;
                if (d2at(best + w) < bestd) { bestd = d2at(best + w); best = ((best + w) % n + n) % n; moved = true; }
                else if (d2at(best - w) < bestd) { bestd = d2at(best - w); best = ((best - w) % n + n) % n; moved = true; }
            }
        }
        if (hint) hint->idx = best;

        double dt = curve_->dense_dt();
        double t = dt * best;
        // Newton on D(t) = |p - gamma(t)|^2, safeguarded to +-2 samples.
        double tlo = t - 2 * dt, thi = t + 2 * dt;
        for (int it = 0; it < 6; ++it) {
            detail::RawEval r = curve_->eval_raw(t);
            Vec2 e = p - r.p;
            double g = -2.0 * e.dot(r.d1);
            double H = 2.0 * (r.d1.norm2() - e.dot(r.d2));
            if (std::abs(H) < 1e-300) break;
            double step = -g / H;
            t = std::clamp(t + step, tlo, thi);
            if (std::abs(step) < 1e-14) break;
        }
        detail::RawEval r = curve_->eval_raw(t);
        Result res;
        res.t = t;
        res.closest = r.p;
        res.delta = p - r.p;
        res.distance = res.delta.norm();
        return res;
    }

    const ClosedCurve& curve() const { return *curve_; }

private:
    const ClosedCurve* curve_;
};

}  // namespace linefield

#pragma once

// Domains built from closed curves: tubular neighborhoods Omega = Gamma +
// B(0, delta), raw single-boundary domains, and two-boundary rings (used
// for variable-width tube fixtures). Provides the signed distance field,
// inward normal ray tracing, boundary sampling, and the class-A
// intersecting-normals test.

#include <optional>
#include <vector>

#include "curve.hpp"

namespace linefield {

enum class DomainMode { Tubular, Raw };

struct DomainSpec {
    ClosedCurve curve;             // core curve (tubular) or boundary (raw)
    std::optional<double> delta;   // tube half-width
    DomainMode mode = DomainMode::Tubular;
};

struct TubularValidation {
    double max_kappa = 0.0;
    double delta = 0.0;
    bool passes = false;   // delta * max|kappa| < 1, strictly
};

// Returns max|kappa| and whether the strict inequality delta < 1/max|kappa|
// holds. Construction of a tube domain throws when it does not.
inline TubularValidation validate_tubular_spec(const DomainSpec& spec) {
    if (spec.mode != DomainMode::Tubular || !spec.delta)
        throw Error(ErrorKind::Validation, "validate_tubular_spec: not a tubular spec");
    TubularValidation v;
    v.max_kappa = spec.curve.max_abs_curvature();
    v.delta = *spec.delta;
    v.passes = v.delta > 0.0 && v.delta * v.max_kappa < 1.0;
    return v;
}

struct BoundarySample {
    Vec2 point;
    Vec2 outward;    // unit normal pointing out of Omega
    int component = 0;
    double s = 0.0;  // arclength parameter along the generating curve
};

struct RayResult {
    Vec2 origin;
    double T = 0.0;           // length of the inward normal segment in closure(Omega)
    Vec2 hit;                 // origin - T * outward
    bool transversal = false; // set by class_A_test when another normal crosses this one
};

class Domain {
public:
    enum class Kind { Tube, Raw, Ring };

    static Domain tube(ClosedCurve core, double delta) {
        DomainSpec spec{core, delta, DomainMode::Tubular};
        TubularValidation v = validate_tubular_spec(spec);
        if (!v.passes)
            throw Error(ErrorKind::TubeOverlap,
                        "tube self-overlap: delta * max|kappa| = " +
                            std::to_string(v.delta * v.max_kappa) + " >= 1");
        Domain d;
        d.kind_ = Kind::Tube;
        d.curves_.push_back(std::move(core));
        d.delta_ = delta;
        d.build_distances();
        return d;
    }

    static Domain raw(ClosedCurve boundary) {
        Domain d;
        d.kind_ = Kind::Raw;
        d.curves_.push_back(std::move(boundary));
        d.build_distances();
        return d;
    }

    // Region between two nested closed curves; outer first.
    static Domain ring(ClosedCurve outer, ClosedCurve inner) {
        if (outer.signed_area() <= inner.signed_area())
            throw Error(ErrorKind::MalformedDomain, "ring: outer curve must enclose more area");
        Domain d;
        d.kind_ = Kind::Ring;
        d.curves_.push_back(std::move(outer));
        d.curves_.push_back(std::move(inner));
        d.build_distances();
        Vec2 probe = d.curves_[1].dense_points()[0];
        if (d.signed_to_curve(0, probe) >= 0.0)
            throw Error(ErrorKind::MalformedDomain, "ring: inner curve not inside outer");
        return d;
    }

    static Domain from_spec(const DomainSpec& spec) {
        if (spec.mode == DomainMode::Tubular) {
            if (!spec.delta)
                throw Error(ErrorKind::Validation, "tubular spec requires delta");
            return tube(spec.curve, *spec.delta);
        }
        return raw(spec.curve);
    }

    Kind kind() const { return kind_; }

    int component_count() const {
        return kind_ == Kind::Raw ? 1 : 2;
    }

    // Parameter length backing boundary_point() for a component.
    double component_param_length(int comp) const {
        check_comp(comp);
        return kind_ == Kind::Tube ? curves_[0].length()
                                   : curves_[static_cast<size_t>(comp)].length();
    }

    // Component 0 is the outer boundary.
    BoundarySample boundary_point(int comp, double s) const {
        check_comp(comp);
        BoundarySample b;
        b.component = comp;
        b.s = s;
        if (kind_ == Kind::Tube) {
            CurvePoint cp = curves_[0].eval(s);
            if (comp == 0) {
                b.point = cp.point + cp.normal * delta_;
                b.outward = cp.normal;
            } else {
                b.point = cp.point - cp.normal * delta_;
                b.outward = cp.normal * -1.0;
            }
        } else {
            CurvePoint cp = curves_[static_cast<size_t>(comp)].eval(s);
            b.point = cp.point;
            b.outward = comp == 0 ? cp.normal : cp.normal * -1.0;
        }
        return b;
    }

    std::vector<BoundarySample> boundary_samples(int comp, int count) const {
        double L = component_param_length(comp);
        std::vector<BoundarySample> out;
        out.reserve(static_cast<size_t>(count));
        for (int i = 0; i < count; ++i)
            out.push_back(boundary_point(comp, L * static_cast<double>(i) / count));
        return out;
    }

    struct SdfHint {
        CurveDistance::Hint a, b;
    };

    // Signed distance to Omega, negative inside.
    double sdf(const Vec2& p) const {
        SdfHint h;
        return sdf(p, h);
    }

    double sdf(const Vec2& p, SdfHint& hint) const {
        switch (kind_) {
            case Kind::Tube:
                return dist_[0].query(p, &hint.a).distance - delta_;
            case Kind::Raw:
                return signed_to_curve(0, p, &hint.a);
            case Kind::Ring: {
                double so = signed_to_curve(0, p, &hint.a);
                double si = signed_to_curve(1, p, &hint.b);
                return std::max(so, -si);
            }
        }
        return 0.0;
    }

    BBox bounding_box() const {
        BBox b = curves_[0].bounding_box();
        if (kind_ == Kind::Tube) b.pad(delta_);
        return b;
    }

    // Smallest geometric feature that the raster must resolve (2*delta for tubes).
    std::optional<double> min_feature() const {
        if (kind_ == Kind::Tube) return 2.0 * delta_;
        return std::nullopt;
    }

    const ClosedCurve& core() const { return curves_[0]; }
    double tube_delta() const { return delta_; }

private:
    void check_comp(int comp) const {
        if (comp < 0 || comp >= component_count())
            throw Error(ErrorKind::Internal, "bad boundary component index");
    }

    void build_distances() {
        dist_.clear();
        for (const auto& c : curves_) dist_.emplace_back(c);
    }

    // Signed distance to a single closed curve, negative inside the curve.
    double signed_to_curve(int which, const Vec2& p,
                           CurveDistance::Hint* hint = nullptr) const {
        CurveDistance::Result q = dist_[static_cast<size_t>(which)].query(p, hint);
        detail::RawEval r = curves_[static_cast<size_t>(which)].eval_raw(q.t);
        Vec2 tangent = r.d1.normalized();
        Vec2 normal{tangent.y, -tangent.x};  // outward for CCW curves
        double side = q.delta.dot(normal);
        return side >= 0.0 ? q.distance : -q.distance;
    }

    Kind kind_ = Kind::Raw;
    std::vector<ClosedCurve> curves_;   // [0] outer / core
    std::vector<CurveDistance> dist_;
    double delta_ = 0.0;
};

inline double signed_distance(const Domain& domain, const Vec2& p) {
    return domain.sdf(p);
}

// ======================================================================
// Normal-ray tracing: T(x) = max{T : segment of length T stays in closure}
// ======================================================================

// Marches the signed distance from a boundary point along the inward
// normal with the given step, then bisects the first exit to ~1e-9.
inline RayResult normal_ray_trace(const Domain& domain, const Vec2& origin,
                                  const Vec2& inward, double step) {
    RayResult res;
    res.origin = origin;
    Vec2 dir = inward.normalized();
    double max_t = 2.0 * domain.bounding_box().diameter();
    Domain::SdfHint hint;

    double t_prev = 0.0;
    double t = step;
    bool entered = false;
    double exit_lo = -1.0, exit_hi = -1.0;
    while (t <= max_t) {
        double d = domain.sdf(origin + dir * t, hint);
        if (d < 0.0) {
            entered = true;
        } else if (entered) {
            exit_lo = t_prev;
            exit_hi = t;
            break;
        } else if (t > 4.0 * step) {
            // Never entered the domain: the normal does not point inward or
            // the domain is thinner than the marching step.
            throw Error(ErrorKind::MalformedDomain,
                        "normal ray does not enter the domain");
        }
        t_prev = t;
        t += step;
    }
    if (exit_lo < 0.0) {
        if (!entered)
            throw Error(ErrorKind::MalformedDomain, "normal ray never enters the domain");
        throw Error(ErrorKind::MalformedDomain,
                    "normal ray exits the bounding box without re-crossing the boundary");
    }
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (exit_lo + exit_hi);
        if (domain.sdf(origin + dir * mid, hint) < 0.0) exit_lo = mid;
        else exit_hi = mid;
        if (exit_hi - exit_lo < 1e-9) break;
    }
    res.T = 0.5 * (exit_lo + exit_hi);
    res.hit = origin + dir * res.T;
    return res;
}

// ======================================================================
// Class-A test (two boundary normals intersecting inside Omega)
// ======================================================================

struct ClassAResult {
    bool in_class_A = false;
    BoundarySample witness_y, witness_z;
    RayResult ray_y, ray_z;  // transversal is set on witnessed rays
    Vec2 intersection;
};

namespace detail {

inline double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b - a).cross(c - a);
}

// Strictly proper segment crossing; collinear or endpoint-touching pairs
// do not count (coincident normal lines are "the same line"). Orientations
// below the rounding floor of the cross products are treated as zero so
// that exactly-collinear segments evaluated in floating point stay
// collinear.
inline bool proper_cross(const Vec2& p1, const Vec2& q1, const Vec2& p2,
                         const Vec2& q2, Vec2* x) {
    double len1 = (q1 - p1).norm(), len2 = (q2 - p2).norm();
    double floor1 = 1e-12 * len1 * std::max(len2, 1.0);
    double floor2 = 1e-12 * len2 * std::max(len1, 1.0);
    double o1 = orient(p1, q1, p2);
    double o2 = orient(p1, q1, q2);
    double o3 = orient(p2, q2, p1);
    double o4 = orient(p2, q2, q1);
    if (std::abs(o1) <= floor1 || std::abs(o2) <= floor1 || std::abs(o3) <= floor2 ||
        std::abs(o4) <= floor2)
        return false;
    if (!(o1 * o2 < 0.0 && o3 * o4 < 0.0)) return false;
    Vec2 r = q1 - p1, s = q2 - p2;
    double denom = r.cross(s);
    double u = (p2 - p1).cross(s) / denom;
    *x = p1 + r * u;
    return true;
}

}  // namespace detail

// Samples N boundary points (split across components by length), traces
// their inward normal segments (clipped at the first boundary crossing),
// and reports whether any two cross at an interior point. Passing a
// non-negative component index restricts sampling to that component.
inline ClassAResult class_A_test(const Domain& domain, int samples, double step,
                                 int component = -1) {
    if (samples < 16)
        throw Error(ErrorKind::Validation, "class_A_test requires N >= 16 samples");
    std::vector<BoundarySample> pts;
    if (component >= 0) {
        pts = domain.boundary_samples(component, samples);
    } else {
        double total = 0.0;
        for (int c = 0; c < domain.component_count(); ++c)
            total += domain.component_param_length(c);
        for (int c = 0; c < domain.component_count(); ++c) {
            int n = std::max(8, static_cast<int>(std::lround(
                                    samples * domain.component_param_length(c) / total)));
            auto s = domain.boundary_samples(c, n);
            pts.insert(pts.end(), s.begin(), s.end());
        }
    }

    std::vector<RayResult> rays;
    rays.reserve(pts.size());
    for (const auto& b : pts)
        rays.push_back(normal_ray_trace(domain, b.point, b.outward * -1.0, step));

    ClassAResult res;
    for (size_t i = 0; i < rays.size(); ++i) {
        for (size_t j = i + 1; j < rays.size(); ++j) {
            Vec2 x;
            if (detail::proper_cross(rays[i].origin, rays[i].hit, rays[j].origin,
                                     rays[j].hit, &x) &&
                domain.sdf(x) < 0.0) {
                res.in_class_A = true;
                res.witness_y = pts[i];
                res.witness_z = pts[j];
                res.ray_y = rays[i];
                res.ray_z = rays[j];
                res.ray_y.transversal = true;
                res.ray_z.transversal = true;
                res.intersection = x;
                return res;
            }
        }
    }
    return res;
}

}  // namespace linefield

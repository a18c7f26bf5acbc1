#pragma once

// Small shared vocabulary for the linefield library: 2D vectors, 2x2
// matrices, boxes, angle arithmetic mod pi, errors, and a chunked
// parallel-for used by the per-cell loops.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace linefield {

inline constexpr double kPi = 3.14159265358979323846;

// ======================================================================
// Vec2 / Mat2 / BBox
// ======================================================================

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }

    // Counterclockwise rotation by 90 degrees.
    Vec2 perp() const { return {-y, x}; }

    Vec2 normalized() const {
        double n = norm();
        return {x / n, y / n};
    }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// Symmetric use is the common case but entries are stored generally.
struct Mat2 {
    double xx = 0.0, xy = 0.0, yx = 0.0, yy = 0.0;

    Vec2 apply(const Vec2& v) const {
        return {xx * v.x + xy * v.y, yx * v.x + yy * v.y};
    }
    Mat2 mul(const Mat2& o) const {
        return {xx * o.xx + xy * o.yx, xx * o.xy + xy * o.yy,
                yx * o.xx + yy * o.yx, yx * o.xy + yy * o.yy};
    }
    double trace() const { return xx + yy; }
    double det() const { return xx * yy - xy * yx; }
    Mat2 operator-(const Mat2& o) const {
        return {xx - o.xx, xy - o.xy, yx - o.yx, yy - o.yy};
    }
    double max_abs() const {
        return std::max(std::max(std::abs(xx), std::abs(xy)),
                        std::max(std::abs(yx), std::abs(yy)));
    }
};

// Outer product v ⊗ w.
inline Mat2 outer(const Vec2& v, const Vec2& w) {
    return {v.x * w.x, v.x * w.y, v.y * w.x, v.y * w.y};
}

struct BBox {
    Vec2 lo{1e300, 1e300};
    Vec2 hi{-1e300, -1e300};

    void expand(const Vec2& p) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    void pad(double m) { lo.x -= m; lo.y -= m; hi.x += m; hi.y += m; }
    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    double diameter() const { return std::hypot(width(), height()); }
    bool contains(const Vec2& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    }
};

// ======================================================================
// Angles mod pi (line directions)
// ======================================================================

// Canonical representative of an unoriented direction, in [0, pi).
inline double canonical_theta(double t) {
    double r = std::fmod(t, kPi);
    if (r < 0.0) r += kPi;
    if (r >= kPi) r = 0.0;
    return r;
}

// Signed increment from one line direction to another, in (-pi/2, pi/2].
inline double line_delta(double from, double to) {
    double d = std::remainder(to - from, kPi);
    if (d <= -kPi / 2) d += kPi;
    return d;
}

// Distance between line directions, in [0, pi/2].
inline double line_distance(double a, double b) {
    return std::abs(line_delta(a, b));
}

// ======================================================================
// Errors
// ======================================================================

enum class ErrorKind {
    InvalidCurve,
    TubeOverlap,
    MalformedDomain,
    Resolution,
    Interpolation,
    ZeroMeasure,
    InvalidLoop,
    RoughField,
    NotAGradient,
    InvalidProjection,
    Internal,
    Parse,
    Validation,
    Io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

// ======================================================================
// Parallel for (row-partitioned loops; LINEFIELD_THREADS caps the pool)
// ======================================================================

inline int thread_budget() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("LINEFIELD_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1) hw = std::min(hw, cap);
    }
    return hw;
}

// Runs fn(begin, end) over disjoint chunks of [0, n). Writes from different
// chunks must not alias; reductions should combine per-chunk results in
// index order to stay deterministic. The first worker exception is rethrown
// on the calling thread.
inline void parallel_for(int n, const std::function<void(int, int)>& fn) {
    int threads = std::min(thread_budget(), std::max(1, n));
    if (threads <= 1 || n < 256) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    int chunk = (n + threads - 1) / threads;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        int b = t * chunk;
        int e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, &errors, t, b, e] {
            try {
                fn(b, e);
            } catch (...) {
                errors[static_cast<size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
}

}  // namespace linefield

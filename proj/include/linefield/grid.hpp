#pragma once

// Uniform Cartesian rasterization of domains and the discrete field
// calculus on top of it: gradients, tensor divergence (interior stencils or
// zero-extended distributional form), L^p norms, bilinear interpolation,
// and boundary traces Pn.
//
// Fields keep a pointer to their grid; the grid must outlive them.

#include <cstdint>
#include <deque>
#include <vector>

#include "domain.hpp"

namespace linefield {

enum class CellKind : std::uint8_t { Outside = 0, Inside = 1, BoundaryBand = 2 };

namespace detail {

// Chamfer (1, sqrt 2) distance in cell units away from a seed region.
inline std::vector<double> chamfer_cells(int nx, int ny,
                                         const std::function<bool(int)>& is_seed) {
    int n = nx * ny;
    std::vector<double> dist(static_cast<size_t>(n), 1e30);
    std::deque<int> queue;
    for (int id = 0; id < n; ++id)
        if (is_seed(id)) {
            dist[static_cast<size_t>(id)] = 0.0;
            queue.push_back(id);
        }
    auto relax = [&](int from, int i, int j, double w) {
        if (i < 0 || i >= nx || j < 0 || j >= ny) return;
        int to = j * nx + i;
        if (dist[static_cast<size_t>(from)] + w < dist[static_cast<size_t>(to)] - 1e-12) {
            dist[static_cast<size_t>(to)] = dist[static_cast<size_t>(from)] + w;
            queue.push_back(to);
        }
    };
    const double diag = std::sqrt(2.0);
    while (!queue.empty()) {
        int id = queue.front();
        queue.pop_front();
        int i = id % nx, j = id / nx;
        relax(id, i + 1, j, 1.0); relax(id, i - 1, j, 1.0);
        relax(id, i, j + 1, 1.0); relax(id, i, j - 1, 1.0);
        relax(id, i + 1, j + 1, diag); relax(id, i - 1, j + 1, diag);
        relax(id, i + 1, j - 1, diag); relax(id, i - 1, j - 1, diag);
    }
    return dist;
}

}  // namespace detail

class RasterGrid {
public:
    // Rasterizes a domain with spacing h; bounding box padded by 4h.
    static RasterGrid rasterize(const Domain& domain, double h) {
        if (h <= 0.0) throw Error(ErrorKind::Validation, "rasterize: h must be positive");
        if (auto mf = domain.min_feature(); mf && *mf / h < 8.0)
            throw Error(ErrorKind::Resolution,
                        "grid too coarse: fewer than 8 cells across the tube width");
        RasterGrid g;
        g.h_ = h;
        BBox Box = domain.bounding_box();
        Box.pad(4.0 * h);
        // Center the lattice on the box so symmetric domains get symmetric grids.
        g.nx_ = static_cast<int>(std::ceil(Box.width() / h));
        g.ny_ = static_cast<int>(std::ceil(Box.height() / h));
        g.x0_ = 0.5 * (Box.lo.x + Box.hi.x) - 0.5 * g.nx_ * h;
        g.y0_ = 0.5 * (Box.lo.y + Box.hi.y) - 0.5 * g.ny_ * h;
        int n = g.nx_ * g.ny_;
        g.kind_.assign(static_cast<size_t>(n), CellKind::Outside);
        g.sdf_.assign(static_cast<size_t>(n), 0.0);

        parallel_for(g.ny_, [&](int jb, int je) {
            for (int j = jb; j < je; ++j) {
                Domain::SdfHint hint;  // hint lifetime = one row, keeps results deterministic
                for (int i = 0; i < g.nx_; ++i) {
                    Vec2 c = g.center(i, j);
                    double d = domain.sdf(c, hint);
                    size_t id = static_cast<size_t>(g.index(i, j));
                    g.sdf_[id] = d;
                    if (d < 0.0)
                        g.kind_[id] = (d > -2.0 * h) ? CellKind::BoundaryBand
                                                     : CellKind::Inside;
                }
            }
        });
        g.dist_boundary_.assign(static_cast<size_t>(n), 0.0);
        for (int id = 0; id < n; ++id)
            g.dist_boundary_[static_cast<size_t>(id)] =
                g.sdf_[static_cast<size_t>(id)] < 0.0 ? -g.sdf_[static_cast<size_t>(id)] : 0.0;
        g.label_components([&](int id) {
            return g.sdf_[static_cast<size_t>(id)] >= 0.0 &&
                   g.sdf_[static_cast<size_t>(id)] < 2.0 * h;
        });
        return g;
    }

    // Synthetic all-inside rectangle (test fixtures and simple fields).
    static RasterGrid rectangle(const BBox& box, double h) {
        RasterGrid g;
        g.h_ = h;
        g.x0_ = box.lo.x;
        g.y0_ = box.lo.y;
        g.nx_ = static_cast<int>(std::lround(box.width() / h));
        g.ny_ = static_cast<int>(std::lround(box.height() / h));
        int n = g.nx_ * g.ny_;
        g.kind_.assign(static_cast<size_t>(n), CellKind::Inside);
        g.sdf_.assign(static_cast<size_t>(n), 0.0);
        g.dist_boundary_.assign(static_cast<size_t>(n), 0.0);
        for (int j = 0; j < g.ny_; ++j)
            for (int i = 0; i < g.nx_; ++i) {
                Vec2 c = g.center(i, j);
                double d = std::min(std::min(c.x - box.lo.x, box.lo.x + g.nx_ * h - c.x),
                                    std::min(c.y - box.lo.y, box.lo.y + g.ny_ * h - c.y));
                size_t id = static_cast<size_t>(g.index(i, j));
                g.sdf_[id] = -d;
                g.dist_boundary_[id] = d;
                if (d < 2.0 * h) g.kind_[id] = CellKind::BoundaryBand;
            }
        g.n_components_ = 1;
        g.component_points_.assign(1, {});
        return g;
    }

    // Rebuilds a grid from a stored mask (CSV loading); distances to the
    // mask boundary come from a BFS chamfer since no sdf is available.
    static RasterGrid from_mask(Vec2 origin, double h, int nx, int ny,
                                const std::vector<std::uint8_t>& inside) {
        RasterGrid g;
        g.h_ = h;
        g.x0_ = origin.x;
        g.y0_ = origin.y;
        g.nx_ = nx;
        g.ny_ = ny;
        int n = nx * ny;
        if (static_cast<int>(inside.size()) != n)
            throw Error(ErrorKind::Validation, "from_mask: size mismatch");
        g.kind_.assign(static_cast<size_t>(n), CellKind::Outside);
        g.sdf_.assign(static_cast<size_t>(n), 1.0);
        g.dist_boundary_.assign(static_cast<size_t>(n), 0.0);
        std::vector<double> from_outside = detail::chamfer_cells(
            nx, ny, [&](int id) { return !inside[static_cast<size_t>(id)]; });
        std::vector<double> from_inside = detail::chamfer_cells(
            nx, ny, [&](int id) { return inside[static_cast<size_t>(id)] != 0; });
        for (int id = 0; id < n; ++id) {
            size_t s = static_cast<size_t>(id);
            if (inside[s]) {
                g.dist_boundary_[s] = from_outside[s] * h;
                g.sdf_[s] = -from_outside[s] * h;
                g.kind_[s] = from_outside[s] < 2.0 ? CellKind::BoundaryBand
                                                   : CellKind::Inside;
            } else {
                g.sdf_[s] = from_inside[s] * h;
            }
        }
        g.label_components([&](int id) {
            return !inside[static_cast<size_t>(id)] && outside_near_inside(inside, nx, ny, id);
        });
        return g;
    }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double h() const { return h_; }
    Vec2 origin() const { return {x0_, y0_}; }
    int cell_count() const { return nx_ * ny_; }
    int index(int i, int j) const { return j * nx_ + i; }
    Vec2 center(int i, int j) const {
        return {x0_ + (i + 0.5) * h_, y0_ + (j + 0.5) * h_};
    }
    bool in_range(int i, int j) const { return i >= 0 && i < nx_ && j >= 0 && j < ny_; }
    CellKind kind(int id) const { return kind_[static_cast<size_t>(id)]; }
    bool inside(int id) const { return kind_[static_cast<size_t>(id)] != CellKind::Outside; }
    bool inside(int i, int j) const { return in_range(i, j) && inside(index(i, j)); }
    double sdf_at(int id) const { return sdf_[static_cast<size_t>(id)]; }
    // Distance from the cell center to the domain boundary (inside cells).
    double boundary_distance(int id) const { return dist_boundary_[static_cast<size_t>(id)]; }
    int component_count() const { return n_components_; }
    const std::vector<std::vector<Vec2>>& component_points() const {
        return component_points_;
    }

    int inside_count() const {
        int c = 0;
        for (int id = 0; id < cell_count(); ++id)
            if (inside(id)) ++c;
        return c;
    }
    double inside_area() const { return inside_count() * h_ * h_; }

private:
    static bool outside_near_inside(const std::vector<std::uint8_t>& inside, int nx,
                                    int ny, int id) {
        int i = id % nx, j = id / nx;
        for (int dj = -2; dj <= 2; ++dj)
            for (int di = -2; di <= 2; ++di) {
                int ii = i + di, jj = j + dj;
                if (ii < 0 || ii >= nx || jj < 0 || jj >= ny) continue;
                if (inside[static_cast<size_t>(jj * nx + ii)]) return true;
            }
        return false;
    }

    // Flood-fills the near-boundary outside cells (8-connected) into labeled
    // components; stores their centers ordered by angle about the centroid.
    template <typename Pred>
    void label_components(const Pred& in_band) {
        int n = cell_count();
        std::vector<int> label(static_cast<size_t>(n), -1);
        int next = 0;
        std::deque<int> queue;
        for (int seed = 0; seed < n; ++seed) {
            if (label[static_cast<size_t>(seed)] != -1 || !in_band(seed)) continue;
            label[static_cast<size_t>(seed)] = next;
            queue.push_back(seed);
            while (!queue.empty()) {
                int id = queue.front();
                queue.pop_front();
                int i = id % nx_, j = id / nx_;
                for (int dj = -1; dj <= 1; ++dj)
                    for (int di = -1; di <= 1; ++di) {
                        if (di == 0 && dj == 0) continue;
                        int ii = i + di, jj = j + dj;
                        if (!in_range(ii, jj)) continue;
                        int to = index(ii, jj);
                        if (label[static_cast<size_t>(to)] == -1 && in_band(to)) {
                            label[static_cast<size_t>(to)] = next;
                            queue.push_back(to);
                        }
                    }
            }
            ++next;
        }
        n_components_ = next;
        component_points_.assign(static_cast<size_t>(next), {});
        std::vector<Vec2> centroid(static_cast<size_t>(next), Vec2{0, 0});
        std::vector<int> count(static_cast<size_t>(next), 0);
        for (int id = 0; id < n; ++id)
            if (label[static_cast<size_t>(id)] >= 0) {
                int l = label[static_cast<size_t>(id)];
                centroid[static_cast<size_t>(l)] += center(id % nx_, id / nx_);
                count[static_cast<size_t>(l)]++;
            }
        for (int l = 0; l < next; ++l)
            centroid[static_cast<size_t>(l)] =
                centroid[static_cast<size_t>(l)] / std::max(1, count[static_cast<size_t>(l)]);
        for (int id = 0; id < n; ++id)
            if (label[static_cast<size_t>(id)] >= 0)
                component_points_[static_cast<size_t>(label[static_cast<size_t>(id)])]
                    .push_back(center(id % nx_, id / nx_));
        for (int l = 0; l < next; ++l) {
            Vec2 c = centroid[static_cast<size_t>(l)];
            auto& pts = component_points_[static_cast<size_t>(l)];
            std::sort(pts.begin(), pts.end(), [&](const Vec2& a, const Vec2& b) {
                return std::atan2(a.y - c.y, a.x - c.x) < std::atan2(b.y - c.y, b.x - c.x);
            });
        }
    }

    double h_ = 0.0, x0_ = 0.0, y0_ = 0.0;
    int nx_ = 0, ny_ = 0;
    std::vector<CellKind> kind_;
    std::vector<double> sdf_;
    std::vector<double> dist_boundary_;
    int n_components_ = 0;
    std::vector<std::vector<Vec2>> component_points_;
};

// ======================================================================
// Fields
// ======================================================================

struct ScalarField {
    const RasterGrid* grid = nullptr;
    std::vector<double> v;
    std::vector<std::uint8_t> valid;

    static ScalarField on(const RasterGrid& g) {
        ScalarField f;
        f.grid = &g;
        f.v.assign(static_cast<size_t>(g.cell_count()), 0.0);
        f.valid.assign(static_cast<size_t>(g.cell_count()), 0);
        for (int id = 0; id < g.cell_count(); ++id)
            f.valid[static_cast<size_t>(id)] = g.inside(id) ? 1 : 0;
        return f;
    }
};

struct VectorField2 {
    const RasterGrid* grid = nullptr;
    std::vector<double> x, y;
    std::vector<std::uint8_t> valid;

    static VectorField2 on(const RasterGrid& g) {
        VectorField2 f;
        f.grid = &g;
        size_t n = static_cast<size_t>(g.cell_count());
        f.x.assign(n, 0.0);
        f.y.assign(n, 0.0);
        f.valid.assign(n, 0);
        for (int id = 0; id < g.cell_count(); ++id)
            f.valid[static_cast<size_t>(id)] = g.inside(id) ? 1 : 0;
        return f;
    }
    Vec2 at(int id) const {
        return {x[static_cast<size_t>(id)], y[static_cast<size_t>(id)]};
    }
};

struct TensorField2x2 {
    const RasterGrid* grid = nullptr;
    std::vector<double> xx, xy, yx, yy;
    std::vector<std::uint8_t> valid;

    static TensorField2x2 on(const RasterGrid& g) {
        TensorField2x2 f;
        f.grid = &g;
        size_t n = static_cast<size_t>(g.cell_count());
        f.xx.assign(n, 0.0);
        f.xy.assign(n, 0.0);
        f.yx.assign(n, 0.0);
        f.yy.assign(n, 0.0);
        f.valid.assign(n, 0);
        for (int id = 0; id < g.cell_count(); ++id)
            f.valid[static_cast<size_t>(id)] = g.inside(id) ? 1 : 0;
        return f;
    }
    Mat2 at(int id) const {
        size_t s = static_cast<size_t>(id);
        return {xx[s], xy[s], yx[s], yy[s]};
    }
};

using Region = std::vector<std::uint8_t>;

inline Region region_valid(const ScalarField& f) { return f.valid; }
inline Region region_valid(const VectorField2& f) { return f.valid; }

inline Region region_all(const RasterGrid& g) {
    return Region(static_cast<size_t>(g.cell_count()), 1);
}

// Inside cells at least margin_cells * h away from the boundary.
inline Region interior_region(const RasterGrid& g, double margin_cells) {
    Region r(static_cast<size_t>(g.cell_count()), 0);
    for (int id = 0; id < g.cell_count(); ++id)
        if (g.inside(id) && g.boundary_distance(id) >= margin_cells * g.h())
            r[static_cast<size_t>(id)] = 1;
    return r;
}

inline Region region_annulus(const RasterGrid& g, Vec2 center, double r0, double r1) {
    Region r(static_cast<size_t>(g.cell_count()), 0);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            double d = (g.center(i, j) - center).norm();
            if (d > r0 && d < r1) r[static_cast<size_t>(g.index(i, j))] = 1;
        }
    return r;
}

inline Region region_and(const Region& a, const Region& b) {
    Region r(a.size(), 0);
    for (size_t i = 0; i < a.size(); ++i) r[i] = (a[i] && b[i]) ? 1 : 0;
    return r;
}

// Cells of a mask at least margin_cells away (chamfer metric) from any
// invalid cell; this keeps clear of the domain boundary and of interior
// mask holes alike.
inline Region mask_interior(const RasterGrid& g, const std::vector<std::uint8_t>& valid,
                            double margin_cells) {
    std::vector<double> dist = detail::chamfer_cells(
        g.nx(), g.ny(), [&](int id) { return !valid[static_cast<size_t>(id)]; });
    Region r(valid.size(), 0);
    for (size_t i = 0; i < valid.size(); ++i)
        if (valid[i] && dist[i] >= margin_cells) r[i] = 1;
    return r;
}

// ======================================================================
// Finite differences
// ======================================================================

namespace detail {

// d/dx along one axis: centered where possible, one-sided second order in
// the boundary band, invalid otherwise. stride selects the axis.
inline bool axis_derivative(const std::vector<double>& v,
                            const std::vector<std::uint8_t>& valid, int i, int j,
                            int nx, int ny, bool along_x, double h, double* out) {
    auto ok = [&](int ii, int jj) {
        return ii >= 0 && ii < nx && jj >= 0 && jj < ny &&
               valid[static_cast<size_t>(jj * nx + ii)];
    };
    auto val = [&](int ii, int jj) { return v[static_cast<size_t>(jj * nx + ii)]; };
    int di = along_x ? 1 : 0, dj = along_x ? 0 : 1;
    if (ok(i + di, j + dj) && ok(i - di, j - dj)) {
        *out = (val(i + di, j + dj) - val(i - di, j - dj)) / (2.0 * h);
        return true;
    }
    // One-sided second order in difference form (exact zero on constants).
    if (ok(i + di, j + dj) && ok(i + 2 * di, j + 2 * dj)) {
        double d1 = val(i + di, j + dj) - val(i, j);
        double d2 = val(i + 2 * di, j + 2 * dj) - val(i, j);
        *out = (4.0 * d1 - d2) / (2.0 * h);
        return true;
    }
    if (ok(i - di, j - dj) && ok(i - 2 * di, j - 2 * dj)) {
        double d1 = val(i - di, j - dj) - val(i, j);
        double d2 = val(i - 2 * di, j - 2 * dj) - val(i, j);
        *out = -(4.0 * d1 - d2) / (2.0 * h);
        return true;
    }
    return false;
}

}  // namespace detail

inline VectorField2 gradient(const ScalarField& f) {
    const RasterGrid& g = *f.grid;
    VectorField2 out = VectorField2::on(g);
    std::fill(out.valid.begin(), out.valid.end(), 0);
    parallel_for(g.ny(), [&](int jb, int je) {
        for (int j = jb; j < je; ++j)
            for (int i = 0; i < g.nx(); ++i) {
                int id = g.index(i, j);
                if (!f.valid[static_cast<size_t>(id)]) continue;
                double dx, dy;
                if (detail::axis_derivative(f.v, f.valid, i, j, g.nx(), g.ny(), true,
                                            g.h(), &dx) &&
                    detail::axis_derivative(f.v, f.valid, i, j, g.nx(), g.ny(), false,
                                            g.h(), &dy)) {
                    out.x[static_cast<size_t>(id)] = dx;
                    out.y[static_cast<size_t>(id)] = dy;
                    out.valid[static_cast<size_t>(id)] = 1;
                }
            }
    });
    return out;
}

// Row-wise divergence of a symmetric tensor field. With extended=true the
// field is extended by zero outside its mask and centered differences are
// taken everywhere; the O(1/h) band along the boundary is the intended
// distributional contribution. With extended=false only interior stencils
// are used.
inline VectorField2 divergence_tensor(const TensorField2x2& P, bool extended) {
    const RasterGrid& g = *P.grid;
    for (int id = 0; id < g.cell_count(); ++id)
        if (P.valid[static_cast<size_t>(id)] &&
            std::abs(P.xy[static_cast<size_t>(id)] - P.yx[static_cast<size_t>(id)]) > 1e-12)
            throw Error(ErrorKind::InvalidProjection,
                        "divergence_tensor: tensor not symmetric within 1e-12");
    VectorField2 out = VectorField2::on(g);
    if (extended) {
        std::fill(out.valid.begin(), out.valid.end(), 1);
        auto val = [&](const std::vector<double>& ch, int i, int j) {
            if (i < 0 || i >= g.nx() || j < 0 || j >= g.ny()) return 0.0;
            size_t id = static_cast<size_t>(g.index(i, j));
            return P.valid[id] ? ch[id] : 0.0;
        };
        parallel_for(g.ny(), [&](int jb, int je) {
            for (int j = jb; j < je; ++j)
                for (int i = 0; i < g.nx(); ++i) {
                    size_t id = static_cast<size_t>(g.index(i, j));
                    double inv = 1.0 / (2.0 * g.h());
                    out.x[id] = (val(P.xx, i + 1, j) - val(P.xx, i - 1, j)) * inv +
                                (val(P.xy, i, j + 1) - val(P.xy, i, j - 1)) * inv;
                    out.y[id] = (val(P.yx, i + 1, j) - val(P.yx, i - 1, j)) * inv +
                                (val(P.yy, i, j + 1) - val(P.yy, i, j - 1)) * inv;
                }
        });
        return out;
    }
    std::fill(out.valid.begin(), out.valid.end(), 0);
    parallel_for(g.ny(), [&](int jb, int je) {
        for (int j = jb; j < je; ++j)
            for (int i = 0; i < g.nx(); ++i) {
                int id = g.index(i, j);
                if (!P.valid[static_cast<size_t>(id)]) continue;
                double dxx_dx, dxy_dy, dyx_dx, dyy_dy;
                bool ok =
                    detail::axis_derivative(P.xx, P.valid, i, j, g.nx(), g.ny(), true,
                                            g.h(), &dxx_dx) &&
                    detail::axis_derivative(P.xy, P.valid, i, j, g.nx(), g.ny(), false,
                                            g.h(), &dxy_dy) &&
                    detail::axis_derivative(P.yx, P.valid, i, j, g.nx(), g.ny(), true,
                                            g.h(), &dyx_dx) &&
                    detail::axis_derivative(P.yy, P.valid, i, j, g.nx(), g.ny(), false,
                                            g.h(), &dyy_dy);
                if (ok) {
                    out.x[static_cast<size_t>(id)] = dxx_dx + dxy_dy;
                    out.y[static_cast<size_t>(id)] = dyx_dx + dyy_dy;
                    out.valid[static_cast<size_t>(id)] = 1;
                }
            }
    });
    return out;
}

// ======================================================================
// Norms and interpolation
// ======================================================================

inline double lp_norm(const ScalarField& f, double p, const Region& region) {
    if (p < 1.0 || !std::isfinite(p))
        throw Error(ErrorKind::Validation, "lp_norm: p must be finite and >= 1");
    const RasterGrid& g = *f.grid;
    double sum = 0.0;
    long count = 0;
    for (int id = 0; id < g.cell_count(); ++id) {
        size_t s = static_cast<size_t>(id);
        if (!region[s] || !f.valid[s]) continue;
        sum += std::pow(std::abs(f.v[s]), p);
        ++count;
    }
    if (count == 0) throw Error(ErrorKind::ZeroMeasure, "lp_norm: empty region");
    return std::pow(sum * g.h() * g.h(), 1.0 / p);
}

inline double lp_norm(const VectorField2& f, double p, const Region& region) {
    if (p < 1.0 || !std::isfinite(p))
        throw Error(ErrorKind::Validation, "lp_norm: p must be finite and >= 1");
    const RasterGrid& g = *f.grid;
    double sum = 0.0;
    long count = 0;
    for (int id = 0; id < g.cell_count(); ++id) {
        size_t s = static_cast<size_t>(id);
        if (!region[s] || !f.valid[s]) continue;
        sum += std::pow(std::hypot(f.x[s], f.y[s]), p);
        ++count;
    }
    if (count == 0) throw Error(ErrorKind::ZeroMeasure, "lp_norm: empty region");
    return std::pow(sum * g.h() * g.h(), 1.0 / p);
}

namespace detail {

struct BilinearStencil {
    int i0, j0;
    double fx, fy;
    bool ok;
};

inline BilinearStencil bilinear_stencil(const RasterGrid& g,
                                        const std::vector<std::uint8_t>& valid,
                                        const Vec2& p) {
    BilinearStencil s{};
    double u = (p.x - g.origin().x) / g.h() - 0.5;
    double w = (p.y - g.origin().y) / g.h() - 0.5;
    s.i0 = static_cast<int>(std::floor(u));
    s.j0 = static_cast<int>(std::floor(w));
    s.fx = u - s.i0;
    s.fy = w - s.j0;
    s.ok = true;
    for (int dj = 0; dj <= 1 && s.ok; ++dj)
        for (int di = 0; di <= 1; ++di) {
            int ii = s.i0 + di, jj = s.j0 + dj;
            if (!g.in_range(ii, jj) ||
                !valid[static_cast<size_t>(g.index(ii, jj))]) {
                s.ok = false;
                break;
            }
        }
    return s;
}

inline double bilinear_value(const RasterGrid& g, const std::vector<double>& v,
                             const BilinearStencil& s) {
    auto val = [&](int ii, int jj) { return v[static_cast<size_t>(g.index(ii, jj))]; };
    return (1 - s.fx) * (1 - s.fy) * val(s.i0, s.j0) +
           s.fx * (1 - s.fy) * val(s.i0 + 1, s.j0) +
           (1 - s.fx) * s.fy * val(s.i0, s.j0 + 1) +
           s.fx * s.fy * val(s.i0 + 1, s.j0 + 1);
}

}  // namespace detail

inline double interpolate(const ScalarField& f, const Vec2& p) {
    auto s = detail::bilinear_stencil(*f.grid, f.valid, p);
    if (!s.ok)
        throw Error(ErrorKind::Interpolation, "interpolate: point outside valid stencil");
    return detail::bilinear_value(*f.grid, f.v, s);
}

inline Vec2 interpolate(const VectorField2& f, const Vec2& p) {
    auto s = detail::bilinear_stencil(*f.grid, f.valid, p);
    if (!s.ok)
        throw Error(ErrorKind::Interpolation, "interpolate: point outside valid stencil");
    return {detail::bilinear_value(*f.grid, f.x, s),
            detail::bilinear_value(*f.grid, f.y, s)};
}

inline Mat2 interpolate(const TensorField2x2& f, const Vec2& p) {
    auto s = detail::bilinear_stencil(*f.grid, f.valid, p);
    if (!s.ok)
        throw Error(ErrorKind::Interpolation, "interpolate: point outside valid stencil");
    return {detail::bilinear_value(*f.grid, f.xx, s),
            detail::bilinear_value(*f.grid, f.xy, s),
            detail::bilinear_value(*f.grid, f.yx, s),
            detail::bilinear_value(*f.grid, f.yy, s)};
}

// ======================================================================
// Boundary trace Pn
// ======================================================================

struct TraceSample {
    BoundarySample where;
    Vec2 Pn;
};

struct BoundaryTrace {
    std::vector<TraceSample> samples;
    double max_abs = 0.0;
    int skipped = 0;  // samples whose interpolation stencil left the mask
};

// Interpolates P one grid spacing inward from each boundary sample and
// applies the outward normal.
inline BoundaryTrace boundary_trace(const TensorField2x2& P,
                                    const std::vector<BoundarySample>& samples) {
    const RasterGrid& g = *P.grid;
    BoundaryTrace out;
    for (const auto& b : samples) {
        Vec2 probe = b.point - b.outward * g.h();
        auto s = detail::bilinear_stencil(g, P.valid, probe);
        if (!s.ok) {
            ++out.skipped;
            continue;
        }
        Mat2 m = {detail::bilinear_value(g, P.xx, s), detail::bilinear_value(g, P.xy, s),
                  detail::bilinear_value(g, P.yx, s), detail::bilinear_value(g, P.yy, s)};
        Vec2 pn = m.apply(b.outward);
        out.max_abs = std::max(out.max_abs, pn.norm());
        out.samples.push_back({b, pn});
    }
    return out;
}

inline std::vector<BoundarySample> all_boundary_samples(const Domain& d,
                                                        int per_component) {
    std::vector<BoundarySample> out;
    for (int c = 0; c < d.component_count(); ++c) {
        auto s = d.boundary_samples(c, per_component);
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

}  // namespace linefield

#pragma once

// File formats: domain specs as JSON, fields as CSV with a JSON sidecar of
// grid metadata, reports as JSON with stable key order and 12-significant-
// digit numbers, and PGM/PPM raster dumps.
//
// CSV schema (one row per grid cell, row-major): x,y,theta,a,b,c,inside
// Doubles are written with %.17g so round trips are bit exact; the loader
// re-derives (a,b,c) from theta and rejects rows violating the projection
// laws.

#include <cstdio>
#include <fstream>
#include <memory>

#include <json.hpp>

#include "analysis.hpp"

namespace linefield {

using json = nlohmann::ordered_json;

// ======================================================================
// Domain JSON
// ======================================================================

inline ClosedCurve curve_from_json(const json& j) {
    if (!j.is_object() || !j.contains("type"))
        throw Error(ErrorKind::Parse, "curve: expected an object with a \"type\" field");
    std::string type = j.at("type").get<std::string>();
    if (type == "fourier") {
        auto arr = [&](const char* key) {
            std::vector<double> v;
            if (j.contains(key)) v = j.at(key).get<std::vector<double>>();
            return v;
        };
        return ClosedCurve::fourier(arr("ax"), arr("bx"), arr("ay"), arr("by"));
    }
    if (type == "polyline") {
        if (!j.contains("points"))
            throw Error(ErrorKind::Parse, "curve: polyline requires \"points\"");
        std::vector<Vec2> pts;
        for (const auto& p : j.at("points")) {
            if (!p.is_array() || p.size() != 2)
                throw Error(ErrorKind::Parse, "curve: points must be [x, y] pairs");
            pts.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        return ClosedCurve::polyline(std::move(pts));
    }
    throw Error(ErrorKind::Parse, "curve: unknown type \"" + type + "\"");
}

inline DomainSpec domain_from_json(const json& j) {
    if (!j.contains("curve"))
        throw Error(ErrorKind::Parse, "domain: missing \"curve\"");
    DomainSpec spec{curve_from_json(j.at("curve")), std::nullopt, DomainMode::Raw};
    std::string mode = j.value("mode", std::string("tubular"));
    if (mode == "tubular") spec.mode = DomainMode::Tubular;
    else if (mode == "raw") spec.mode = DomainMode::Raw;
    else throw Error(ErrorKind::Parse, "domain: mode must be \"tubular\" or \"raw\"");
    if (j.contains("delta")) spec.delta = j.at("delta").get<double>();
    if (spec.mode == DomainMode::Tubular) {
        if (!spec.delta)
            throw Error(ErrorKind::Validation, "domain: tubular mode requires \"delta\"");
        TubularValidation v = validate_tubular_spec(spec);
        if (!v.passes)
            throw Error(ErrorKind::Validation,
                        "domain: delta must satisfy 0 < delta < 1/||kappa||_inf "
                        "(delta * max|kappa| = " +
                            std::to_string(v.delta * v.max_kappa) + ")");
    }
    return spec;
}

inline DomainSpec load_domain(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open domain file " + path);
    json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, "domain JSON parse error in " + path + ": " + e.what());
    }
    return domain_from_json(j);
}

// ======================================================================
// Field CSV + sidecar
// ======================================================================

struct LoadedField {
    std::shared_ptr<RasterGrid> grid;
    LineField field;
    json sidecar;
};

inline std::string sidecar_path(const std::string& csv_path) {
    return csv_path + ".json";
}

inline void save_field(const std::string& path, const LineField& f,
                       const json& generator = json()) {
    const RasterGrid& g = *f.grid;
    std::FILE* out = std::fopen(path.c_str(), "wb");
    if (!out) throw Error(ErrorKind::Io, "cannot write field file " + path);
    std::fputs("x,y,theta,a,b,c,inside\n", out);
    char buf[256];
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            int id = g.index(i, j);
            size_t s = static_cast<size_t>(id);
            Vec2 c = g.center(i, j);
            if (f.valid[s]) {
                ProjectionEntries e = f.entries(id);
                std::snprintf(buf, sizeof buf,
                              "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,1\n", c.x, c.y,
                              f.theta[s], e.a, e.b, e.c);
            } else {
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,0,0,0,0,0\n", c.x, c.y);
            }
            std::fputs(buf, out);
        }
    std::fclose(out);

    json meta;
    meta["bbox"] = {g.origin().x, g.origin().y, g.origin().x + g.nx() * g.h(),
                    g.origin().y + g.ny() * g.h()};
    meta["h"] = g.h();
    meta["nx"] = g.nx();
    meta["ny"] = g.ny();
    meta["components"] = g.component_count();
    if (!generator.is_null()) meta["generator"] = generator;
    std::ofstream side(sidecar_path(path));
    if (!side) throw Error(ErrorKind::Io, "cannot write sidecar for " + path);
    side << meta.dump(2) << "\n";
}

inline LoadedField load_field(const std::string& path) {
    json meta;
    {
        std::ifstream side(sidecar_path(path));
        if (!side) throw Error(ErrorKind::Io, "missing sidecar " + sidecar_path(path));
        try {
            side >> meta;
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Parse, std::string("sidecar parse error: ") + e.what());
        }
    }
    for (const char* key : {"h", "nx", "ny", "bbox"})
        if (!meta.contains(key))
            throw Error(ErrorKind::Parse, std::string("sidecar missing key ") + key);
    double h = meta["h"].get<double>();
    int nx = meta["nx"].get<int>();
    int ny = meta["ny"].get<int>();
    Vec2 origin{meta["bbox"][0].get<double>(), meta["bbox"][1].get<double>()};

    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open field file " + path);
    std::string line;
    if (!std::getline(in, line) || line != "x,y,theta,a,b,c,inside")
        throw Error(ErrorKind::Parse, "field CSV: header mismatch");

    std::vector<std::uint8_t> inside(static_cast<size_t>(nx) * static_cast<size_t>(ny), 0);
    std::vector<double> theta(inside.size(), 0.0);
    size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (row >= inside.size())
            throw Error(ErrorKind::Parse, "field CSV: more rows than nx*ny cells");
        double vals[6];
        const char* p = line.c_str();
        char* end = nullptr;
        for (int k = 0; k < 6; ++k) {
            vals[k] = std::strtod(p, &end);
            if (end == p || *end != ',')
                throw Error(ErrorKind::Parse,
                            "field CSV: malformed row " + std::to_string(row + 2));
            p = end + 1;
        }
        long flag = std::strtol(p, &end, 10);
        if (end == p || (flag != 0 && flag != 1))
            throw Error(ErrorKind::Parse,
                        "field CSV: inside flag must be 0 or 1 (row " +
                            std::to_string(row + 2) + ")");
        int ci = static_cast<int>(row) % nx, cj = static_cast<int>(row) / nx;
        if (std::abs(vals[0] - (origin.x + (ci + 0.5) * h)) > 1e-9 ||
            std::abs(vals[1] - (origin.y + (cj + 0.5) * h)) > 1e-9)
            throw Error(ErrorKind::Validation,
                        "field CSV: cell coordinates do not match the sidecar grid "
                        "(row " + std::to_string(row + 2) + ")");
        if (flag) {
            double t = vals[2];
            if (!std::isfinite(t) || t < 0.0 || t >= kPi)
                throw Error(ErrorKind::Validation,
                            "field CSV: theta outside [0, pi) at row " +
                                std::to_string(row + 2));
            double ct = std::cos(t), st = std::sin(t);
            double a = ct * ct, b = st * ct, c = 1.0 - a;
            if (std::abs(a - vals[3]) > 1e-12 || std::abs(b - vals[4]) > 1e-12 ||
                std::abs(c - vals[5]) > 1e-12 ||
                std::abs(vals[4] * vals[4] - vals[3] * vals[5]) > 1e-12)
                throw Error(ErrorKind::Validation,
                            "field CSV: projection invariants violated at row " +
                                std::to_string(row + 2));
            inside[row] = 1;
            theta[row] = t;
        }
        ++row;
    }
    if (row != inside.size())
        throw Error(ErrorKind::Parse, "field CSV: fewer rows than nx*ny cells");

    LoadedField out;
    out.grid = std::make_shared<RasterGrid>(
        RasterGrid::from_mask(origin, h, nx, ny, inside));
    out.field = LineField::on(*out.grid);
    out.field.valid = inside;
    out.field.theta = std::move(theta);
    out.sidecar = std::move(meta);
    return out;
}

// ======================================================================
// Reports
// ======================================================================

// Decimal rounding to 12 significant digits keeps report bytes stable
// across runs while staying well above verification tolerances.
inline double round12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

inline json condition_json(const ConditionResult& c) {
    json j;
    j["pass"] = c.pass;
    if (!c.tested) j["status"] = "untested";
    j["value"] = round12(c.value);
    j["tol"] = round12(c.tol);
    return j;
}

inline json verification_report_json(const VerificationReport& rep) {
    json conditions;
    conditions["1a_projection"] = condition_json(rep.projection);
    conditions["1b_rank"] = condition_json(rep.rank);
    conditions["1c_symmetry"] = condition_json(rep.symmetry);
    conditions["1d_div_l2"] = condition_json(rep.div_l2);
    conditions["1e_eikonal"] = condition_json(rep.eikonal);
    conditions["trace"] = condition_json(rep.trace);
    json norms;
    json hs = json::array(), nn = json::array(), rr = json::array();
    for (double h : rep.hs) hs.push_back(round12(h));
    for (double v : rep.div_l2_sq) nn.push_back(round12(v));
    for (double v : rep.growth_rates) rr.push_back(round12(v));
    norms["h"] = hs;
    norms["div_l2_squared"] = nn;
    norms["growth_rates"] = rr;
    norms["residual_max"] = round12(rep.residual_max);
    json j;
    j["conditions"] = conditions;
    j["norms"] = norms;
    j["verdict"] = rep.overall ? "pass" : "fail";
    return j;
}

inline json tubularity_report_json(const TubularityVerdict& v) {
    json j;
    j["is_tubular"] = v.is_tubular;
    json stats;
    stats["mean"] = round12(v.t_stats.mean);
    stats["std"] = round12(v.t_stats.stddev);
    stats["min"] = round12(v.t_stats.min);
    stats["max"] = round12(v.t_stats.max);
    stats["cv"] = round12(v.t_stats.cv);
    j["T_stats"] = stats;
    j["components"] = v.components;
    json gamma = json::array();
    for (const Vec2& p : v.gamma) gamma.push_back({round12(p.x), round12(p.y)});
    j["gamma"] = gamma;
    j["delta"] = round12(v.delta);
    j["reason"] = v.reason.empty() ? json() : json(v.reason);
    return j;
}

inline bool report_schema_ok(const json& j) {
    if (j.contains("conditions") && j.contains("norms") && j.contains("verdict"))
        return true;
    if (j.contains("is_tubular") && j.contains("T_stats") && j.contains("components"))
        return true;
    if (j.contains("defects") && j.contains("orientable")) return true;
    if (j.contains("p") && j.contains("entries")) return true;
    return false;
}

inline void save_report(const std::string& path, const json& report) {
    if (!report.is_object() || !report_schema_ok(report))
        throw Error(ErrorKind::Validation,
                    "save_report: report does not match any known schema");
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write report " + path);
    out << report.dump(2) << "\n";
}

// ======================================================================
// Raster images
// ======================================================================

// Grayscale PGM of a scalar field, min-max normalized; masked cells black.
inline void save_raster(const std::string& path, const ScalarField& f) {
    const RasterGrid& g = *f.grid;
    double mn = 1e300, mx = -1e300;
    for (size_t i = 0; i < f.v.size(); ++i)
        if (f.valid[i]) {
            mn = std::min(mn, f.v[i]);
            mx = std::max(mx, f.v[i]);
        }
    double span = mx > mn ? mx - mn : 1.0;
    std::FILE* out = std::fopen(path.c_str(), "wb");
    if (!out) throw Error(ErrorKind::Io, "cannot write raster " + path);
    std::fprintf(out, "P5\n%d %d\n255\n", g.nx(), g.ny());
    for (int j = g.ny() - 1; j >= 0; --j)
        for (int i = 0; i < g.nx(); ++i) {
            size_t id = static_cast<size_t>(g.index(i, j));
            unsigned char px = 0;
            if (f.valid[id])
                px = static_cast<unsigned char>(
                    std::lround(255.0 * (f.v[id] - mn) / span));
            std::fputc(px, out);
        }
    std::fclose(out);
}

namespace detail {

inline void hue_to_rgb(double hue01, unsigned char rgb[3]) {
    double h6 = 6.0 * (hue01 - std::floor(hue01));
    int sect = static_cast<int>(h6) % 6;
    double f = h6 - std::floor(h6);
    double q = 1.0 - f;
    double r = 0, g = 0, b = 0;
    switch (sect) {
        case 0: r = 1; g = f; b = 0; break;
        case 1: r = q; g = 1; b = 0; break;
        case 2: r = 0; g = 1; b = f; break;
        case 3: r = 0; g = q; b = 1; break;
        case 4: r = f; g = 0; b = 1; break;
        default: r = 1; g = 0; b = q; break;
    }
    rgb[0] = static_cast<unsigned char>(std::lround(255.0 * r));
    rgb[1] = static_cast<unsigned char>(std::lround(255.0 * g));
    rgb[2] = static_cast<unsigned char>(std::lround(255.0 * b));
}

}  // namespace detail

// PPM of a line field: hue = 2*theta, so theta and theta + pi render the
// same color; masked cells black.
inline void save_raster(const std::string& path, const LineField& f) {
    const RasterGrid& g = *f.grid;
    std::FILE* out = std::fopen(path.c_str(), "wb");
    if (!out) throw Error(ErrorKind::Io, "cannot write raster " + path);
    std::fprintf(out, "P6\n%d %d\n255\n", g.nx(), g.ny());
    for (int j = g.ny() - 1; j >= 0; --j)
        for (int i = 0; i < g.nx(); ++i) {
            size_t id = static_cast<size_t>(g.index(i, j));
            unsigned char rgb[3] = {0, 0, 0};
            if (f.valid[id])
                detail::hue_to_rgb(f.theta[id] / kPi, rgb);
            std::fwrite(rgb, 1, 3, out);
        }
    std::fclose(out);
}

}  // namespace linefield

// linefield command-line front end.
//
// Exit codes: 0 = success / mathematical pass, 1 = negative mathematical
// verdict (not tubular, verification failed, non-orientable), 2 = usage or
// input error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <linefield/linefield.hpp>

namespace lf = linefield;
using lf::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitVerdict = 1;
constexpr int kExitUsage = 2;

std::vector<double> refine_sequence(double h, int halvings) {
    std::vector<double> hs;
    for (int k = halvings; k >= 0; --k) hs.push_back(h * std::pow(2.0, k));
    return hs;
}

lf::FieldProvider provider_from_generator(const json& gen, const lf::Domain& domain) {
    std::string name = gen.value("name", std::string());
    if (name == "tubular") {
        return [&domain](const lf::RasterGrid& g) {
            return lf::exact_tubular_solution(domain, g);
        };
    }
    if (name == "vortex" || name == "target") {
        lf::Vec2 c{gen.value("cx", 0.0), gen.value("cy", 0.0)};
        int alpha = gen.value("alpha", 1);
        return [c, alpha](const lf::RasterGrid& g) {
            return lf::forget_orientation(lf::vortex_field(g, c, alpha));
        };
    }
    if (name == "uturn") {
        lf::Vec2 c{gen.value("cx", 0.0), gen.value("cy", 0.0)};
        return [c](const lf::RasterGrid& g) { return lf::uturn_field(g, c); };
    }
    if (name == "grain") {
        double tl = gen.value("theta_left", 0.0);
        double tr = gen.value("theta_right", lf::kPi / 3.0);
        double ix = gen.value("ix", 0.0);
        return [tl, tr, ix](const lf::RasterGrid& g) {
            return lf::grain_boundary_field(g, tl, tr, {ix, 0.0}, {0.0, 1.0});
        };
    }
    if (name == "constant") {
        double t = gen.value("theta", 0.0);
        return [t](const lf::RasterGrid& g) { return lf::constant_field(g, t); };
    }
    throw lf::Error(lf::ErrorKind::Validation,
                    "field has no regenerable generator metadata (\"" + name + "\")");
}

void print_conditions(const lf::VerificationReport& rep) {
    auto line = [](const char* name, const lf::ConditionResult& c) {
        std::printf("%-14s %s  value=%.6g tol=%.6g\n", name,
                    !c.tested ? "UNTESTED" : (c.pass ? "pass" : "FAIL"), c.value, c.tol);
    };
    line("1a projection", rep.projection);
    line("1b rank", rep.rank);
    line("1c symmetry", rep.symmetry);
    line("1d div in L2", rep.div_l2);
    line("1e P divP = 0", rep.eikonal);
    line("trace Pn", rep.trace);
}

int cmd_solve(const std::string& domain_path, double h, const std::string& out,
              const std::string& report_path) {
    lf::DomainSpec spec = lf::load_domain(domain_path);
    if (spec.mode != lf::DomainMode::Tubular)
        throw lf::Error(lf::ErrorKind::Validation,
                        "solve requires a tubular-mode domain with a core curve and delta");
    lf::Domain domain = lf::Domain::from_spec(spec);
    lf::RasterGrid grid = lf::RasterGrid::rasterize(domain, h);
    lf::LineField field = lf::exact_tubular_solution(domain, grid);
    lf::save_field(out, field, json{{"name", "tubular"}});
    if (!report_path.empty()) {
        lf::VerificationReport rep = lf::verify_solution(field, domain);
        lf::save_report(report_path, lf::verification_report_json(rep));
        print_conditions(rep);
        if (!rep.overall) return kExitVerdict;
    }
    return kExitPass;
}

int cmd_verify(const std::string& field_path, const std::string& domain_path,
               int refine, const std::string& report_path) {
    lf::LoadedField loaded = lf::load_field(field_path);
    lf::DomainSpec spec = lf::load_domain(domain_path);
    lf::Domain domain = lf::Domain::from_spec(spec);

    // Spot check that the stored mask matches the domain geometry.
    {
        const lf::RasterGrid& g = *loaded.grid;
        int checked = 0, wrong = 0;
        for (int id = 0; id < g.cell_count(); id += 97) {
            lf::Vec2 c = g.center(id % g.nx(), id / g.nx());
            bool inside = domain.sdf(c) < 0.0;
            bool flagged = loaded.field.valid[static_cast<size_t>(id)] != 0;
            ++checked;
            if (inside != flagged) ++wrong;
        }
        if (wrong > checked / 50)
            throw lf::Error(lf::ErrorKind::Validation,
                            "field mask does not match the domain geometry");
    }

    lf::VerificationReport rep;
    if (refine > 0) {
        if (!loaded.sidecar.contains("generator"))
            throw lf::Error(lf::ErrorKind::Validation,
                            "--refine requires generator metadata in the field sidecar");
        lf::FieldProvider provider =
            provider_from_generator(loaded.sidecar["generator"], domain);
        rep = lf::verify_solution(provider, domain,
                                  refine_sequence(loaded.grid->h(), refine));
    } else {
        rep = lf::verify_solution(loaded.field, domain);
    }
    if (!report_path.empty())
        lf::save_report(report_path, lf::verification_report_json(rep));
    print_conditions(rep);
    std::printf("verdict: %s\n", rep.overall ? "pass" : "fail");
    return rep.overall ? kExitPass : kExitVerdict;
}

int cmd_classify(const std::string& domain_path, int samples, double h,
                 const std::string& report_path) {
    lf::DomainSpec spec = lf::load_domain(domain_path);
    lf::Domain domain = lf::Domain::from_spec(spec);
    lf::RasterGrid grid = lf::RasterGrid::rasterize(domain, h);
    lf::TubularityVerdict verdict = lf::classify_domain(domain, grid, samples);
    if (!report_path.empty())
        lf::save_report(report_path, lf::tubularity_report_json(verdict));
    if (verdict.is_tubular)
        std::printf("tubular: delta=%.6g mean T=%.6g cv=%.3g%%\n", verdict.delta,
                    verdict.t_stats.mean, 100.0 * verdict.t_stats.cv);
    else
        std::printf("not tubular: %s\n", verdict.reason.c_str());
    return verdict.is_tubular ? kExitPass : kExitVerdict;
}

int cmd_pattern(const std::string& name, const std::string& domain_path, double h,
                const std::string& out, double cx, double cy, int alpha, double theta,
                double theta_left, double theta_right, double ix) {
    lf::DomainSpec spec = lf::load_domain(domain_path);
    lf::Domain domain = lf::Domain::from_spec(spec);
    lf::RasterGrid grid = lf::RasterGrid::rasterize(domain, h);
    lf::LineField field;
    json gen;
    gen["name"] = name;
    if (name == "tubular") {
        if (spec.mode != lf::DomainMode::Tubular)
            throw lf::Error(lf::ErrorKind::Validation,
                            "pattern tubular requires a tubular-mode domain");
        field = lf::exact_tubular_solution(domain, grid);
    } else if (name == "vortex" || name == "target") {
        field = lf::forget_orientation(lf::vortex_field(grid, {cx, cy}, alpha));
        gen["cx"] = cx;
        gen["cy"] = cy;
        gen["alpha"] = alpha;
    } else if (name == "uturn") {
        field = lf::uturn_field(grid, {cx, cy});
        gen["cx"] = cx;
        gen["cy"] = cy;
    } else if (name == "grain") {
        field = lf::grain_boundary_field(grid, theta_left, theta_right, {ix, 0.0},
                                         {0.0, 1.0});
        gen["theta_left"] = theta_left;
        gen["theta_right"] = theta_right;
        gen["ix"] = ix;
    } else if (name == "constant") {
        field = lf::constant_field(grid, theta);
        gen["theta"] = theta;
    } else {
        throw lf::Error(lf::ErrorKind::Validation, "unknown pattern \"" + name + "\"");
    }
    lf::save_field(out, field, gen);
    return kExitPass;
}

int cmd_scan(const std::string& field_path, const std::string& report_path,
             const std::string& raster_path) {
    lf::LoadedField loaded = lf::load_field(field_path);
    const lf::RasterGrid& g = *loaded.grid;
    const lf::LineField& f = loaded.field;

    json defects = json::array();
    // Plaquette windings on 2x2 blocks of valid cells.
    for (int j = 0; j + 1 < g.ny(); ++j)
        for (int i = 0; i + 1 < g.nx(); ++i) {
            std::vector<int> loop = {g.index(i, j), g.index(i + 1, j),
                                     g.index(i + 1, j + 1), g.index(i, j + 1)};
            bool ok = true;
            for (int id : loop)
                if (!f.valid[static_cast<size_t>(id)]) ok = false;
            if (!ok) continue;
            double w = lf::winding_number(f, loop);
            if (std::abs(w) > 0.25) {
                lf::Vec2 c = (g.center(i, j) + g.center(i + 1, j + 1)) / 2.0;
                defects.push_back({{"x", lf::round12(c.x)},
                                   {"y", lf::round12(c.y)},
                                   {"charge", lf::round12(w)}});
            }
        }
    // Interior mask holes: loop around each hole component that does not
    // touch the grid border.
    {
        int n = g.cell_count();
        std::vector<int> label(static_cast<size_t>(n), -1);
        int next = 0;
        for (int seed = 0; seed < n; ++seed) {
            if (label[static_cast<size_t>(seed)] != -1 ||
                f.valid[static_cast<size_t>(seed)])
                continue;
            std::vector<int> stack{seed}, cells;
            label[static_cast<size_t>(seed)] = next;
            bool touches_border = false;
            while (!stack.empty()) {
                int id = stack.back();
                stack.pop_back();
                cells.push_back(id);
                int i = id % g.nx(), j = id / g.nx();
                if (i == 0 || j == 0 || i == g.nx() - 1 || j == g.ny() - 1)
                    touches_border = true;
                const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    int ii = i + di[k], jj = j + dj[k];
                    if (!g.in_range(ii, jj)) continue;
                    int to = g.index(ii, jj);
                    if (label[static_cast<size_t>(to)] == -1 &&
                        !f.valid[static_cast<size_t>(to)]) {
                        label[static_cast<size_t>(to)] = next;
                        stack.push_back(to);
                    }
                }
            }
            ++next;
            if (touches_border) continue;
            int ilo = g.nx(), ihi = -1, jlo = g.ny(), jhi = -1;
            for (int id : cells) {
                ilo = std::min(ilo, id % g.nx());
                ihi = std::max(ihi, id % g.nx());
                jlo = std::min(jlo, id / g.nx());
                jhi = std::max(jhi, id / g.nx());
            }
            int ci = (ilo + ihi) / 2, cj = (jlo + jhi) / 2;
            int base = std::max(ihi - ilo, jhi - jlo) / 2 + 1;
            for (int grow = 1; grow <= 4; ++grow) {
                int r = base + grow;
                if (ci - r < 0 || ci + r >= g.nx() || cj - r < 0 || cj + r >= g.ny())
                    break;
                std::vector<int> loop = lf::rect_loop(g, ci, cj, r);
                bool ok = true;
                for (int id : loop) {
                    if (!f.valid[static_cast<size_t>(id)]) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) continue;
                double w = lf::winding_number(f, loop);
                if (std::abs(w) > 0.25) {
                    lf::Vec2 c = g.center(ci, cj);
                    defects.push_back({{"x", lf::round12(c.x)},
                                       {"y", lf::round12(c.y)},
                                       {"charge", lf::round12(w)}});
                }
                break;
            }
        }
    }

    bool orientable = false;
    double witness_winding = 0.0;
    lf::LiftResult lifted = lf::lift(f);
    orientable = lifted.orientable;
    if (!lifted.orientable) witness_winding = lifted.witness_winding;

    lf::TensorField2x2 P = lf::to_tensor(f);
    lf::VectorField2 div = lf::divergence_tensor(P, true);
    double max_div = 0.0;
    lf::ScalarField mag = lf::ScalarField::on(g);
    std::fill(mag.valid.begin(), mag.valid.end(), 1);
    for (int id = 0; id < g.cell_count(); ++id) {
        size_t s = static_cast<size_t>(id);
        mag.v[s] = std::hypot(div.x[s], div.y[s]);
        max_div = std::max(max_div, mag.v[s]);
    }
    if (!raster_path.empty()) lf::save_raster(raster_path, mag);

    json rep;
    rep["defects"] = defects;
    rep["orientable"] = orientable;
    rep["witness_winding"] = orientable ? json() : json(lf::round12(witness_winding));
    rep["max_divergence"] = lf::round12(max_div);
    if (!report_path.empty()) lf::save_report(report_path, rep);
    std::printf("defects: %d, orientable: %s\n", static_cast<int>(defects.size()),
                orientable ? "yes" : "no");
    return orientable ? kExitPass : kExitVerdict;
}

int cmd_norms(const std::string& field_path, double p, const std::string& eps_list,
              double cx, double cy, double r_outer, const std::string& report_path) {
    std::vector<double> eps;
    std::stringstream ss(eps_list);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) eps.push_back(std::stod(tok));
    if (eps.empty())
        throw lf::Error(lf::ErrorKind::Validation, "--eps-list must not be empty");

    lf::LoadedField loaded = lf::load_field(field_path);
    lf::TensorField2x2 P = lf::to_tensor(loaded.field);
    lf::VectorField2 div = lf::divergence_tensor(P, false);
    json entries = json::array();
    for (double e : eps) {
        lf::Region region = lf::region_and(
            lf::region_annulus(*loaded.grid, {cx, cy}, e, r_outer), div.valid);
        double norm = lf::lp_norm(div, p, region);
        entries.push_back({{"eps", lf::round12(e)},
                           {"norm", lf::round12(norm)},
                           {"norm_pow_p", lf::round12(std::pow(norm, p))}});
        std::printf("eps=%-8g ||div P||_%g = %.6g  (^%g = %.6g)\n", e, p, norm, p,
                    std::pow(norm, p));
    }
    json rep;
    rep["p"] = lf::round12(p);
    rep["entries"] = entries;
    if (!report_path.empty()) lf::save_report(report_path, rep);
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"projection-valued eikonal toolkit"};
    app.require_subcommand(1);
    // --h is a spec'd spacing flag on several subcommands; keep help long-form.
    app.set_help_flag("--help", "print help");

    std::string domain_path, field_path, out_path, report_path, raster_path;
    std::string pattern_name, eps_list;
    double h = 1.0 / 256.0;
    int refine = 0, samples = 256, alpha = 1;
    double cx = 0.0, cy = 0.0, theta = 0.0;
    double theta_left = 0.0, theta_right = lf::kPi / 3.0, ix = 0.0;
    double p_exp = 2.0, r_outer = 1.0;

    auto sub = [&](const char* name, const char* desc) {
        CLI::App* s = app.add_subcommand(name, desc);
        s->set_help_flag("--help", "print help");
        return s;
    };

    CLI::App* solve = sub("solve", "construct the exact tubular solution");
    solve->add_option("--domain", domain_path)->required();
    solve->add_option("--h", h);
    solve->add_option("--out", out_path)->required();
    solve->add_option("--report", report_path);

    CLI::App* verify = sub("verify", "check conditions (1a)-(1e)");
    verify->add_option("--field", field_path)->required();
    verify->add_option("--domain", domain_path)->required();
    verify->add_option("--refine", refine);
    verify->add_option("--report", report_path)->required();

    CLI::App* classify = sub("classify", "tubularity classification");
    classify->add_option("--domain", domain_path)->required();
    classify->add_option("--samples", samples);
    classify->add_option("--h", h);
    classify->add_option("--report", report_path)->required();

    CLI::App* pattern = sub("pattern", "write a canonical pattern field");
    pattern->add_option("--name", pattern_name)->required();
    pattern->add_option("--domain", domain_path)->required();
    pattern->add_option("--h", h);
    pattern->add_option("--out", out_path)->required();
    pattern->add_option("--cx", cx);
    pattern->add_option("--cy", cy);
    pattern->add_option("--alpha", alpha);
    pattern->add_option("--theta", theta);
    pattern->add_option("--theta-left", theta_left);
    pattern->add_option("--theta-right", theta_right);
    pattern->add_option("--ix", ix);

    CLI::App* scan = sub("scan", "singularity and orientability scan");
    scan->add_option("--field", field_path)->required();
    scan->add_option("--report", report_path)->required();
    scan->add_option("--raster", raster_path);

    CLI::App* norms = sub("norms", "L^p norms of div P on annuli");
    norms->add_option("--field", field_path)->required();
    norms->add_option("--p", p_exp);
    norms->add_option("--eps-list", eps_list)->required();
    norms->add_option("--cx", cx);
    norms->add_option("--cy", cy);
    norms->add_option("--r-outer", r_outer);
    norms->add_option("--report", report_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (solve->parsed()) return cmd_solve(domain_path, h, out_path, report_path);
        if (verify->parsed())
            return cmd_verify(field_path, domain_path, refine, report_path);
        if (classify->parsed())
            return cmd_classify(domain_path, samples, h, report_path);
        if (pattern->parsed())
            return cmd_pattern(pattern_name, domain_path, h, out_path, cx, cy, alpha,
                               theta, theta_left, theta_right, ix);
        if (scan->parsed()) return cmd_scan(field_path, report_path, raster_path);
        if (norms->parsed())
            return cmd_norms(field_path, p_exp, eps_list, cx, cy, r_outer, report_path);
    } catch (const lf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "config.hpp"
#include "maslov/analysis.hpp"
#include "maslov/closedform.hpp"
#include "maslov/errors.hpp"
#include "maslov/rp1.hpp"

namespace {

using maslov::Error;
using maslov::ErrorKind;
using maslov::cli::json;

constexpr int kExitOk = 0;
constexpr int kExitIndexUndefined = 2;
constexpr int kExitConfig = 3;
constexpr int kExitNumerical = 4;

int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::IndexUndefined: return kExitIndexUndefined;
    case ErrorKind::Config:
    case ErrorKind::InvalidDegree:
    case ErrorKind::InvalidPoint:
    case ErrorKind::NotApplicable: return kExitConfig;
    default: return kExitNumerical;
    }
}

struct Common {
    std::string config;
    std::string out;
    std::string csv;
    bool quiet = false;
};

void emit(const json& doc, const std::string& out) {
    const std::string text = doc.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw Error(ErrorKind::Config, "cannot write '" + out + "'");
    f << text;
}

std::ofstream open_csv(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Config, "cannot write '" + path.string() + "'");
    f << std::setprecision(17);
    return f;
}

void note(const Common& c, const std::string& line) {
    if (!c.quiet) std::cerr << line << '\n';
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
    Common common;
    std::optional<double> lambda_max;
    std::optional<int> nx;
    std::optional<double> tol_cross;
    bool no_scan = false;
};

int cmd_analyze(const AnalyzeArgs& a) {
    maslov::cli::Config cfg = maslov::cli::load_config(a.common.config);
    if (!cfg.problem) throw Error(ErrorKind::Config, "analyze needs a problem (L, D, V)");
    maslov::Problem& p = *cfg.problem;
    if (a.lambda_max) p.lambda_max = *a.lambda_max;
    if (a.nx) p.grid.nx = *a.nx;
    if (a.tol_cross) p.tol.cross = *a.tol_cross;
    p.validate();
    maslov::BoxOptions opts;
    opts.scan_interior = cfg.scan_interior && !a.no_scan;
    const maslov::BoxReport rep = maslov::box_index(p, opts);

    const std::string out = !a.common.out.empty() ? a.common.out : cfg.out.value_or("");
    emit(maslov::cli::box_report_json(cfg, rep), out);

    const std::string csv = !a.common.csv.empty() ? a.common.csv : cfg.csv.value_or("");
    if (!csv.empty()) {
        const std::filesystem::path dir(csv);
        std::filesystem::create_directories(dir);
        auto sides = open_csv(dir / "sides.csv");
        sides << "side,t,x,lambda,psi1,psi2,theta\n";
        const maslov::BoxGeometry box{rep.delta, rep.lambda_infinity};
        for (const auto& s : rep.sides) {
            for (std::size_t i = 0; i < s.path.size(); ++i) {
                const auto [x, l] = maslov::side_point(s.side, box, p.L, s.path.params[i]);
                sides << maslov::to_string(s.side) << ',' << s.path.params[i] << ',' << x << ',' << l << ','
                      << s.path.points[i].x << ',' << s.path.points[i].y << ',' << s.path.theta[i] << '\n';
            }
        }
        auto leaves = open_csv(dir / "leave_points.csv");
        leaves << "x,lambda,i_minus,i_plus,local_index,kind\n";
        for (const auto& lp : rep.leave_points)
            leaves << lp.x << ',' << lp.lambda << ',' << lp.i_minus << ',' << lp.i_plus << ',' << lp.local_index
                   << ',' << lp.kind << '\n';
    }
    std::ostringstream summary;
    summary << "m_index=" << rep.m_index << " eigenvalues=" << rep.eigenvalues.size()
            << " conjugate_points=" << rep.conjugate_points.size() << " leave_points=" << rep.leave_points.size();
    note(a.common, summary.str());
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct TuringArgs {
    Common common;
    std::string A;
    std::string d;
    std::string L;
    std::optional<double> lambda_min;
};

Eigen::Matrix2d parse_matrix(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            v.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw Error(ErrorKind::Config, "malformed matrix entry '" + cell + "'");
        }
    }
    if (v.size() != 4) throw Error(ErrorKind::Config, "--A needs four comma-separated entries a11,a12,a21,a22");
    Eigen::Matrix2d a;
    a << v[0], v[1], v[2], v[3];
    return a;
}

int cmd_turing(const TuringArgs& a) {
    maslov::cli::TuringSpec spec;
    std::string out = a.common.out, csv = a.common.csv;
    if (!a.common.config.empty()) {
        const auto cfg = maslov::cli::load_config(a.common.config);
        if (!cfg.turing) throw Error(ErrorKind::Config, "config has no turing section");
        spec = *cfg.turing;
        if (out.empty()) out = cfg.out.value_or("");
        if (csv.empty()) csv = cfg.csv.value_or("");
    }
    if (!a.A.empty()) spec.A = parse_matrix(a.A);
    else if (a.common.config.empty()) throw Error(ErrorKind::Config, "turing needs --A or --config");
    if (!a.d.empty()) spec.d = maslov::cli::parse_sweep(a.d).values();
    if (!a.L.empty()) spec.L = maslov::cli::parse_sweep(a.L).values();
    if (a.lambda_min) spec.lambda_min = *a.lambda_min;
    if (spec.d.empty()) throw Error(ErrorKind::Config, "turing needs --d (value or from:to:step)");
    if (!maslov::kinetically_stable(spec.A))
        throw Error(ErrorKind::Config, "not a Turing setup: need det A > 0 and tr A < 0");

    json rows = json::array();
    std::vector<std::optional<double>> lengths;
    if (spec.L.empty()) lengths.push_back(std::nullopt);
    for (double L : spec.L) lengths.emplace_back(L);
    for (double d : spec.d) {
        for (const auto& L : lengths) {
            const auto t = maslov::turing_assess(spec.A, d, L, spec.lambda_min);
            json row = maslov::cli::turing_json(t);
            json lead = {{"d", d}, {"L", L ? json(*L) : json(nullptr)}};
            lead.update(row);
            lead["m_index"] = nullptr;
            if (L) {
                const auto m = maslov::turing_m_index(spec.A, d, *L);
                lead["m_index"] = m ? json(*m) : json(nullptr);
            }
            const auto ds = maslov::delta_star_contains(spec.A, d, 64);
            lead["delta_star"] = {{"contains", ds.contains},
                                  {"ratio", ds.ratio},
                                  {"witness", ds.witness ? json::array({ds.witness->first, ds.witness->second})
                                                         : json(nullptr)}};
            rows.push_back(lead);
        }
    }
    json doc;
    doc["A"] = json::array({json::array({spec.A(0, 0), spec.A(0, 1)}), json::array({spec.A(1, 0), spec.A(1, 1)})});
    doc["lambda_min"] = spec.lambda_min;
    doc["rows"] = rows;
    emit(doc, out);

    if (!csv.empty()) {
        auto f = open_csv(csv);
        f << "d,L,regime,d_star,lambda_c,x_max,x_int,m_index\n";
        auto cell = [](const json& v) -> std::string {
            if (v.is_null()) return "";
            if (v.is_string()) return v.get<std::string>();
            std::ostringstream os;
            os << std::setprecision(17) << (v.is_number_integer() ? static_cast<double>(v.get<long>()) : v.get<double>());
            return os.str();
        };
        for (const auto& r : rows)
            f << cell(r["d"]) << ',' << cell(r["L"]) << ',' << cell(r["regime"]) << ',' << cell(r["d_star"]) << ','
              << cell(r["lambda_c"]) << ',' << cell(r["x_max"]) << ',' << cell(r["x_int"]) << ','
              << cell(r["m_index"]) << '\n';
    }
    note(a.common, std::to_string(rows.size()) + " turing row(s)");
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct WindArgs {
    Common common;
    std::string path;
    std::optional<double> tol_cross;
};

int cmd_wind(const WindArgs& a) {
    std::ifstream in(a.path);
    if (!in) throw Error(ErrorKind::Config, "cannot open path CSV '" + a.path + "'");
    const maslov::RP1Path path = maslov::read_path_csv(in);
    maslov::LiftOptions opts;
    if (a.tol_cross) opts.eps_cross = *a.tol_cross;
    json doc;
    doc["samples"] = path.size();
    if (path.size() == 0) {
        doc["wind"] = 0;
        doc["crossings"] = json::array();
        emit(doc, a.common.out);
        return kExitOk;
    }
    const maslov::RP1Path lifted = maslov::lift_path(path, opts);
    doc["wind"] = maslov::wind(lifted, opts);
    json cs = json::array();
    for (const auto& c : maslov::signed_crossings(lifted, opts))
        cs.push_back({{"t", c.t}, {"sign", c.sign}, {"transverse", c.transverse}});
    doc["crossings"] = cs;
    emit(doc, a.common.out);
    if (!a.common.csv.empty()) {
        auto f = open_csv(a.common.csv);
        maslov::write_path_csv(f, lifted);
    }
    note(a.common, "wind=" + std::to_string(doc["wind"].get<int>()));
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct CurvesArgs {
    Common common;
    std::string kind = "eigencurve";
    int n_max = 5;
    double lambda = 0.0;
    int samples = 200;
};

int cmd_curves(const CurvesArgs& a) {
    const auto cfg = maslov::cli::load_config(a.common.config);
    if (!cfg.problem) throw Error(ErrorKind::Config, "curves needs a problem (L, D, V)");
    const auto& p = *cfg.problem;
    if (!p.V.is_constant()) throw Error(ErrorKind::Config, "curves needs a constant potential");
    if (a.samples < 1) throw Error(ErrorKind::Config, "--samples must be positive");
    const Eigen::MatrixXd v = p.V.values().front();
    std::vector<maslov::CurveSample> rows;
    if (a.kind == "eigencurve" || a.kind == "both") {
        auto r = maslov::eigencurve_samples(v, p.D, p.L, a.n_max, a.samples);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    if (a.kind == "detx" || a.kind == "both") {
        auto r = maslov::detx_samples(v, p.D, p.L, a.lambda, a.samples);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    if (a.kind != "eigencurve" && a.kind != "detx" && a.kind != "both")
        throw Error(ErrorKind::Config, "--kind must be eigencurve, detx or both");
    if (a.common.csv.empty()) {
        maslov::write_curves_csv(std::cout, rows);
    } else {
        auto f = open_csv(a.common.csv);
        maslov::write_curves_csv(f, rows);
    }
    note(a.common, std::to_string(rows.size()) + " curve rows");
    return kExitOk;
}

void add_common(CLI::App* app, Common& c, bool config_required) {
    auto* opt = app->add_option("--config", c.config, "JSON configuration file");
    if (config_required) opt->required()->check(CLI::ExistingFile);
    app->add_option("--out", c.out, "write the JSON report here instead of stdout");
    app->add_flag("--quiet", c.quiet, "suppress the summary line on stderr");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hyperplane Maslov index toolkit: box indices, Turing diagnostics, RP^1 winding"};
    app.require_subcommand(1);

    AnalyzeArgs analyze;
    auto* sa = app.add_subcommand("analyze", "box index, eigenvalues, conjugate points and leave points");
    add_common(sa, analyze.common, true);
    sa->add_option("--csv", analyze.common.csv, "directory for sides.csv and leave_points.csv");
    sa->add_option("--lambda-max", analyze.lambda_max, "override the top of the box");
    sa->add_option("--nx", analyze.nx, "RK4 steps per unit length");
    sa->add_option("--tol-cross", analyze.tol_cross, "RP^1 crossing tolerance");
    sa->add_flag("--no-scan", analyze.no_scan, "skip the interior leave-point scan");

    TuringArgs turing;
    auto* st = app.add_subcommand("turing", "closed-form Turing diagnostics and sweeps");
    add_common(st, turing.common, false);
    st->add_option("--csv", turing.common.csv, "CSV file with one row per (d, L)");
    st->add_option("--A", turing.A, "reaction matrix a11,a12,a21,a22");
    st->add_option("--d", turing.d, "diffusion ratio, or sweep from:to:step");
    st->add_option("--L", turing.L, "interval length, or sweep from:to:step");
    st->add_option("--lambda-min", turing.lambda_min, "lower end of the leave-point search");

    WindArgs wind;
    auto* sw = app.add_subcommand("wind", "winding number of a sampled RP^1 path (CSV t,x,y)");
    sw->add_option("path", wind.path, "path CSV")->required()->check(CLI::ExistingFile);
    sw->add_option("--out", wind.common.out, "write the JSON result here instead of stdout");
    sw->add_option("--csv", wind.common.csv, "write the lifted path (t,x,y,theta) here");
    sw->add_option("--tol-cross", wind.tol_cross, "crossing tolerance");
    sw->add_flag("--quiet", wind.common.quiet, "suppress the summary line on stderr");

    CurvesArgs curves;
    auto* sc = app.add_subcommand("curves", "eigencurve / det X samples for constant problems");
    add_common(sc, curves.common, true);
    sc->add_option("--csv", curves.common.csv, "CSV output file (default stdout)");
    sc->add_option("--kind", curves.kind, "eigencurve, detx or both");
    sc->add_option("--n-max", curves.n_max, "largest mode number for eigencurves");
    sc->add_option("--lambda", curves.lambda, "lambda for det X samples");
    sc->add_option("--samples", curves.samples, "samples along x");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << maslov::cli::error_json("config", e.what()).dump() << '\n';
        return kExitConfig;
    }

    try {
        if (sa->parsed()) return cmd_analyze(analyze);
        if (st->parsed()) return cmd_turing(turing);
        if (sw->parsed()) return cmd_wind(wind);
        if (sc->parsed()) return cmd_curves(curves);
    } catch (const Error& e) {
        std::cerr << maslov::cli::error_json(std::string(maslov::to_string(e.kind())), e.what(), e.x(), e.lambda())
                         .dump()
                  << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << maslov::cli::error_json("numerical-failure", e.what()).dump() << '\n';
        return kExitNumerical;
    }
    return kExitConfig;
}

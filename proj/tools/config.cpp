#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "maslov/errors.hpp"

namespace maslov::cli {

namespace {

[[noreturn]] void fail(const std::string& message) { throw Error(ErrorKind::Config, message); }

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(where + " must be an object");
    const std::set<std::string> names(allowed.begin(), allowed.end());
    for (const auto& item : obj.items())
        if (!names.count(item.key())) fail("unknown key '" + item.key() + "' in " + where);
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(where + " must be finite");
    return x;
}

int integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) fail(where + " must be an integer");
    return v.get<int>();
}

Eigen::MatrixXd matrix(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) fail(where + " must be a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(v.size());
    Eigen::MatrixXd m(rows, rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = v[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows) fail(where + " must be square");
        for (Eigen::Index j = 0; j < rows; ++j)
            m(i, j) = number(row[static_cast<std::size_t>(j)], where);
    }
    return m;
}

Eigen::VectorXd vector(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) fail(where + " must be a non-empty array");
    Eigen::VectorXd d(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) d(static_cast<Eigen::Index>(i)) = number(v[i], where);
    return d;
}

Potential potential(const json& v, int n) {
    check_keys(v, "V", {"matrix", "builtin", "samples"});
    if (v.size() != 1) fail("V needs exactly one of matrix, builtin, samples");
    if (v.contains("matrix")) return Potential::constant(matrix(v["matrix"], "V.matrix"));
    if (v.contains("builtin")) {
        if (!v["builtin"].is_string()) fail("V.builtin must be a string");
        return Potential::builtin(v["builtin"].get<std::string>(), n);
    }
    const auto& s = v["samples"];
    check_keys(s, "V.samples", {"x", "values"});
    if (!s.contains("x") || !s.contains("values")) fail("V.samples needs x and values");
    const Eigen::VectorXd xs = vector(s["x"], "V.samples.x");
    if (!s["values"].is_array()) fail("V.samples.values must be an array of matrices");
    std::vector<Eigen::MatrixXd> values;
    for (const auto& m : s["values"]) values.push_back(matrix(m, "V.samples.values"));
    return Potential::sampled(std::vector<double>(xs.data(), xs.data() + xs.size()), std::move(values));
}

BoundaryCondition boundary(const json& v, const std::string& where) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "dirichlet") return BoundaryCondition::dirichlet();
        if (s == "neumann") return BoundaryCondition::neumann();
        fail(where + " must be \"dirichlet\", \"neumann\" or {\"robin\": matrix}");
    }
    check_keys(v, where, {"robin"});
    if (!v.contains("robin")) fail(where + " object must hold a robin matrix");
    return BoundaryCondition::robin(matrix(v["robin"], where + ".robin"));
}

std::vector<double> values_or_sweep(const json& obj, const char* key, const char* sweep_key,
                                    const std::string& where) {
    const bool single = obj.contains(key), swept = obj.contains(sweep_key);
    if (single == swept) fail(where + " needs exactly one of " + key + ", " + sweep_key);
    if (single) return {number(obj[key], where + "." + key)};
    const auto& s = obj[sweep_key];
    check_keys(s, where + "." + sweep_key, {"from", "to", "step"});
    if (!s.contains("from") || !s.contains("to") || !s.contains("step"))
        fail(where + "." + sweep_key + " needs from, to and step");
    Sweep sw{number(s["from"], "from"), number(s["to"], "to"), number(s["step"], "step")};
    return sw.values();
}

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

template <class T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

} // namespace

std::vector<double> Sweep::values() const {
    if (!(step > 0.0)) fail("sweep step must be positive");
    if (to < from) fail("sweep end must not precede its start");
    std::vector<double> out;
    const auto count = static_cast<long>(std::floor((to - from) / step + 1e-9));
    if (count > 100000) fail("sweep has too many points");
    for (long k = 0; k <= count; ++k) out.push_back(from + step * static_cast<double>(k));
    return out;
}

Sweep parse_sweep(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ':')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            fail("malformed sweep '" + text + "'");
        }
    }
    if (parts.size() == 1) return {parts[0], parts[0], 1.0};
    if (parts.size() != 3) fail("sweep must be from:to:step");
    return {parts[0], parts[1], parts[2]};
}

Config parse_config(const json& doc) {
    check_keys(doc, "config", {"L", "D", "V", "bc0", "bc1", "lambda_max", "grid", "tolerances", "scan_interior",
                               "turing", "output"});
    Config c;
    c.echo = doc;
    const bool has_problem = doc.contains("L") || doc.contains("D") || doc.contains("V");
    if (has_problem) {
        if (!doc.contains("L") || !doc.contains("D") || !doc.contains("V")) fail("a problem needs L, D and V");
        Problem p;
        p.L = number(doc["L"], "L");
        p.D = vector(doc["D"], "D");
        p.V = potential(doc["V"], static_cast<int>(p.D.size()));
        if (doc.contains("bc0")) p.bc0 = boundary(doc["bc0"], "bc0");
        if (doc.contains("bc1")) {
            if (!doc["bc1"].is_string() || doc["bc1"].get<std::string>() != "dirichlet")
                fail("bc1 must be \"dirichlet\"");
        }
        if (doc.contains("lambda_max")) p.lambda_max = number(doc["lambda_max"], "lambda_max");
        if (doc.contains("grid")) {
            const auto& g = doc["grid"];
            check_keys(g, "grid", {"nx", "x_samples", "lambda_rows", "scan_rows", "refine_depth", "qr_every"});
            if (g.contains("nx")) p.grid.nx = integer(g["nx"], "grid.nx");
            if (g.contains("x_samples")) p.grid.x_samples = integer(g["x_samples"], "grid.x_samples");
            if (g.contains("lambda_rows")) p.grid.lambda_rows = integer(g["lambda_rows"], "grid.lambda_rows");
            if (g.contains("scan_rows")) p.grid.scan_rows = integer(g["scan_rows"], "grid.scan_rows");
            if (g.contains("refine_depth")) p.grid.refine_depth = integer(g["refine_depth"], "grid.refine_depth");
            if (g.contains("qr_every")) p.grid.qr_every = integer(g["qr_every"], "grid.qr_every");
        }
        if (doc.contains("tolerances")) {
            const auto& t = doc["tolerances"];
            check_keys(t, "tolerances", {"cross", "root", "leave", "delta_floor"});
            if (t.contains("cross")) p.tol.cross = number(t["cross"], "tolerances.cross");
            if (t.contains("root")) p.tol.root = number(t["root"], "tolerances.root");
            if (t.contains("leave")) p.tol.leave = number(t["leave"], "tolerances.leave");
            if (t.contains("delta_floor")) p.tol.delta_floor = number(t["delta_floor"], "tolerances.delta_floor");
        }
        p.validate();
        c.problem = std::move(p);
    } else {
        for (const char* key : {"bc0", "bc1", "lambda_max", "grid", "tolerances"})
            if (doc.contains(key)) fail(std::string(key) + " given without a problem (L, D, V)");
    }
    if (doc.contains("scan_interior")) {
        if (!doc["scan_interior"].is_boolean()) fail("scan_interior must be a boolean");
        c.scan_interior = doc["scan_interior"].get<bool>();
    }
    if (doc.contains("turing")) {
        const auto& t = doc["turing"];
        check_keys(t, "turing", {"A", "d", "d_sweep", "L", "L_sweep", "lambda_min"});
        if (!t.contains("A")) fail("turing.A is required");
        const Eigen::MatrixXd a = matrix(t["A"], "turing.A");
        if (a.rows() != 2) fail("turing.A must be 2 x 2");
        TuringSpec spec;
        spec.A = a;
        spec.d = values_or_sweep(t, "d", "d_sweep", "turing");
        if (t.contains("L") || t.contains("L_sweep")) spec.L = values_or_sweep(t, "L", "L_sweep", "turing");
        if (t.contains("lambda_min")) spec.lambda_min = number(t["lambda_min"], "turing.lambda_min");
        c.turing = spec;
    }
    if (doc.contains("output")) {
        const auto& o = doc["output"];
        check_keys(o, "output", {"report", "csv"});
        if (o.contains("report")) {
            if (!o["report"].is_string()) fail("output.report must be a string");
            c.out = o["report"].get<std::string>();
        }
        if (o.contains("csv")) {
            if (!o["csv"].is_string()) fail("output.csv must be a string");
            c.csv = o["csv"].get<std::string>();
        }
    }
    return c;
}

Config load_config(const std::string& path) {
    const auto dot = path.find_last_of('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    if (ext == "toml") fail("TOML configs are not supported; convert the file to JSON");
    std::ifstream in(path);
    if (!in) fail("cannot open config '" + path + "'");
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        fail("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

std::optional<std::pair<Eigen::Matrix2d, double>> turing_shape(const Problem& problem) {
    if (problem.n() != 2 || !problem.V.is_constant() || problem.D(0) != 1.0) return std::nullopt;
    if (problem.bc0.kind != BoundaryKind::Dirichlet) return std::nullopt;
    const Eigen::Matrix2d a = problem.V.values().front();
    if (!kinetically_stable(a)) return std::nullopt;
    return std::make_pair(a, problem.D(1));
}

json turing_json(const TuringDiagnostics& t) {
    json j;
    j["regime"] = to_string(t.regime);
    j["margin"] = t.margin;
    j["d_star"] = opt(t.d_star);
    j["lambda_c"] = opt(t.lambda_c);
    j["x_max"] = opt(t.x_max);
    j["x_int"] = opt(t.x_int);
    j["L0_window"] = t.L0_window ? json::array({t.L0_window->first, t.L0_window->second}) : json(nullptr);
    json lps = json::array();
    for (const auto& p : t.leave_points)
        lps.push_back({{"x", p.x}, {"lambda", p.lambda}, {"m", p.m}, {"n", p.n}, {"local_index", p.local_index}});
    j["leave_points"] = lps;
    j["warnings"] = t.warnings;
    return j;
}

json box_report_json(const Config& config, const BoxReport& r) {
    const Problem& p = *config.problem;
    json j;
    json echo;
    echo["L"] = p.L;
    echo["D"] = std::vector<double>(p.D.data(), p.D.data() + p.D.size());
    echo["V"] = config.echo.contains("V") ? config.echo["V"] : json(nullptr);
    echo["bc0"] = to_string(p.bc0.kind);
    if (p.bc0.kind == BoundaryKind::Robin) echo["robin"] = matrix_json(p.bc0.theta);
    echo["bc1"] = "dirichlet";
    echo["lambda_max"] = opt(p.lambda_max);
    echo["grid"] = {{"nx", p.grid.nx},
                    {"x_samples", p.grid.x_samples},
                    {"lambda_rows", p.grid.lambda_rows},
                    {"scan_rows", p.grid.scan_rows},
                    {"refine_depth", p.grid.refine_depth},
                    {"qr_every", p.grid.qr_every}};
    echo["tolerances"] = {{"cross", p.tol.cross},
                          {"root", p.tol.root},
                          {"leave", p.tol.leave},
                          {"delta_floor", p.tol.delta_floor}};
    j["problem"] = echo;
    j["lambda_infinity"] = r.lambda_infinity;
    j["delta"] = r.delta;
    json cps = json::array();
    for (const auto& c : r.conjugate_points)
        cps.push_back({{"x", c.x}, {"direction", c.direction}, {"flagged", c.flagged}});
    j["conjugate_points"] = cps;
    j["eigenvalues"] = r.eigenvalues;
    j["sides"] = {{"bottom", r.ind_bottom}, {"right", r.ind_right}, {"top", r.ind_top}, {"left", r.ind_left}};
    j["m_index"] = r.m_index;
    j["m_bottom_right"] = r.m_bottom_right;
    const auto& m = r.morse;
    j["morse"] = {{"nonnegative_eigenvalues", m.nonnegative_eigenvalues},
                  {"positive_eigenvalues", m.positive_eigenvalues},
                  {"conjugate_points_closed", m.conjugate_points_closed},
                  {"conjugate_points_open", m.conjugate_points_open},
                  {"bottom_bound", m.bottom_bound},
                  {"nonnegative_bound", m.nonnegative_bound},
                  {"positive_bound", m.positive_bound},
                  {"equality", m.equality}};
    json lps = json::array();
    for (const auto& lp : r.leave_points)
        lps.push_back({{"x", lp.x},
                       {"lambda", lp.lambda},
                       {"i_minus", lp.i_minus},
                       {"i_plus", lp.i_plus},
                       {"local_index", lp.local_index},
                       {"kind", lp.kind},
                       {"loop_wind", lp.loop_wind},
                       {"resolved", lp.resolved},
                       {"residual", lp.residual}});
    j["interior"] = {{"scanned", r.interior_scanned},
                     {"clean", r.interior_clean},
                     {"rho_min", r.rho_min},
                     {"leave_sum_consistent", r.leave_sum_consistent},
                     {"leave_points", lps}};
    std::vector<std::string> warnings = r.warnings;
    if (const auto shape = turing_shape(p)) {
        TuringDiagnostics t = turing_assess(shape->first, shape->second, p.L);
        j["turing"] = turing_json(t);
        j["turing"]["m_index"] = opt(turing_m_index(shape->first, shape->second, p.L, r.delta));
    } else {
        j["turing"] = nullptr;
    }
    if (p.n() == 2 && p.V.is_constant()) {
        const Genericity g = genericity_check(p.V.values().front(), p.L);
        json w = nullptr;
        if (g.witness) w = {g.witness->first, g.witness->second};
        j["genericity"] = {{"generic", g.generic},
                           {"reason", g.reason},
                           {"witness", w},
                           {"complex_eigenvalues", g.complex_eigenvalues}};
        if (g.complex_eigenvalues)
            warnings.push_back("V has complex eigenvalues: the ratio condition is vacuous and the "
                               "difference condition was not checked");
    } else {
        j["genericity"] = nullptr;
    }
    j["warnings"] = warnings;
    return j;
}

json error_json(const std::string& kind, const std::string& message, std::optional<double> x,
                std::optional<double> lambda) {
    json e = {{"kind", kind}, {"message", message}};
    if (x) e["x"] = *x;
    if (lambda) e["lambda"] = *lambda;
    return {{"error", e}};
}

} // namespace maslov::cli

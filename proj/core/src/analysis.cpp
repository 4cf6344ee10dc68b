#include "maslov/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <future>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "maslov/errors.hpp"
#include "maslov/exterior.hpp"

namespace maslov {

namespace {

struct PsiPair {
    double p1 = 0.0;
    double p2 = 0.0;
    double norm() const { return std::hypot(p1, p2); }
};

// Normalized (psi1, psi2) of the plane spanned by a positively oriented frame.
PsiPair psi_pair(const StandardForms& forms, const Frame& f) {
    const KVector xi = plucker(f);
    const double g = std::sqrt((f.transpose() * f).determinant());
    return {pairing(forms.omega1, xi) / g, pairing(forms.omega2, xi) / g};
}

// Point evaluations of psi at arbitrary (x, lambda); thread-safe.
class Evaluator {
public:
    explicit Evaluator(const Problem& problem)
        : problem_(&problem), forms_(standard_forms(problem.n(), problem.D)) {}

    const StandardForms& forms() const { return forms_; }

    PsiPair at(double x, double lambda) const {
        FlowIntegrator flow(*problem_, lambda);
        return psi_pair(forms_, flow.frame_at(x));
    }

private:
    const Problem* problem_;
    StandardForms forms_;
};

// Runs body(i) for i in [0, count) on a small thread pool; rethrows the
// first exception.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
    const std::size_t hw = std::max<unsigned>(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min(hw, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

std::string location(double x, double lambda) {
    std::ostringstream os;
    os.precision(10);
    os << "(x=" << x << ", lambda=" << lambda << ")";
    return os.str();
}

LiftOptions lift_options(const Problem& problem) {
    LiftOptions o;
    o.eps_cross = problem.tol.cross;
    o.max_depth = std::max(problem.grid.refine_depth, 1) + 8;
    o.continuous_representative = true;
    return o;
}

// Samples of phi along one side together with the point map t -> psi.
struct SideSamples {
    RP1Path path;
    std::vector<double> norms;
    std::function<PsiPair(double)> eval;
    double length = 0.0;
};

SideSamples sample_side(const Problem& problem, Side side, const BoxGeometry& box,
                        const Evaluator& ev) {
    const double L = problem.L;
    const double delta = box.delta;
    const double top = box.lambda_top;
    SideSamples s;

    auto add = [&](double t, PsiPair p) {
        s.path.push_back(t, {p.p1, p.p2});
        s.norms.push_back(p.norm());
    };

    if (side == Side::Bottom || side == Side::Top) {
        const double lambda = side == Side::Bottom ? 0.0 : top;
        auto flow = std::make_shared<FlowIntegrator>(problem, lambda);
        std::vector<std::pair<double, PsiPair>> nodes;
        nodes.emplace_back(delta, psi_pair(ev.forms(), flow->frame_at(delta)));
        flow->for_each_node(L, [&](double x, const Frame& f) {
            if (x > delta && x < L * (1.0 - 1e-12)) nodes.emplace_back(x, psi_pair(ev.forms(), f));
        });
        nodes.emplace_back(L, psi_pair(ev.forms(), flow->frame_at(L)));
        if (side == Side::Top) std::reverse(nodes.begin(), nodes.end());
        for (const auto& [x, p] : nodes) add(side == Side::Bottom ? x - delta : L - x, p);
        s.length = L - delta;
        auto mutex = std::make_shared<std::mutex>();
        const StandardForms forms = ev.forms();
        s.eval = [flow, mutex, forms, side, delta, L](double t) {
            std::lock_guard<std::mutex> lock(*mutex);
            const double x = side == Side::Bottom ? delta + t : L - t;
            return psi_pair(forms, flow->frame_at(std::clamp(x, 0.0, L)));
        };
        return s;
    }

    const double x = side == Side::Right ? L : delta;
    const int rows = problem.grid.lambda_rows;
    std::vector<PsiPair> values(static_cast<std::size_t>(rows) + 1);
    parallel_for(values.size(), [&](std::size_t r) {
        values[r] = ev.at(x, top * static_cast<double>(r) / rows);
    });
    if (side == Side::Left) std::reverse(values.begin(), values.end());
    for (int r = 0; r <= rows; ++r) add(top * static_cast<double>(r) / rows, values[static_cast<std::size_t>(r)]);
    s.length = top;
    s.eval = [&ev, side, x, top](double t) { return ev.at(x, side == Side::Right ? t : top - t); };
    return s;
}

// Minimizes |(psi1, psi2)| on [a, b] by golden-section search. Stops early
// once the bracket cannot hold a value below `floor` given the slope bound.
double golden_min(const std::function<PsiPair(double)>& f, double a, double b, double slope, double floor,
                  double* t_out) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c).norm(), fd = f(d).norm();
    for (int it = 0; it < 80 && b - a > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
        if (std::min(fc, fd) - slope * (b - a) > floor) break;
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c).norm();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d).norm();
        }
    }
    *t_out = fc < fd ? c : d;
    return std::min(fc, fd);
}

// Throws IndexUndefined when the side meets H1 n H2.
void check_side_leaves(const Problem& problem, Side side, const BoxGeometry& box, const SideSamples& s) {
    const double tol = problem.tol.leave;
    auto fail = [&](double t) {
        const auto [x, lambda] = side_point(side, box, problem.L, t);
        throw Error(ErrorKind::IndexUndefined,
                    std::string("the ") + to_string(side) + " side leaves the MA space at " + location(x, lambda),
                    x, lambda);
    };
    const auto& r = s.norms;
    const auto& t = s.path.params;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] < tol) fail(t[i]);
        const bool left_ok = i == 0 || r[i] <= r[i - 1];
        const bool right_ok = i + 1 == r.size() || r[i] <= r[i + 1];
        // Every discrete local minimum is refined: a leave point between two
        // coarse rows can hide behind samples of size O(row spacing).
        if (!(left_ok && right_ok)) continue;
        double best_t = t[i];
        const double a = i == 0 ? t[i] : t[i - 1];
        const double b = i + 1 == r.size() ? t[i] : t[i + 1];
        // Local slope of |psi| from the neighbouring samples, with a safety factor.
        double slope = 0.0;
        if (i > 0) slope = std::max(slope, std::abs(r[i] - r[i - 1]) / (t[i] - t[i - 1]));
        if (i + 1 < r.size()) slope = std::max(slope, std::abs(r[i + 1] - r[i]) / (t[i + 1] - t[i]));
        if (b > a && golden_min(s.eval, a, b, 4.0 * slope, tol, &best_t) < tol) fail(best_t);
    }
}

Refiner refiner_of(const SideSamples& s) {
    auto eval = s.eval;
    return [eval](double t) {
        const PsiPair p = eval(t);
        return RP1Point{p.p1, p.p2};
    };
}

} // namespace

const char* to_string(Side side) noexcept {
    switch (side) {
    case Side::Bottom: return "bottom";
    case Side::Right: return "right";
    case Side::Top: return "top";
    case Side::Left: return "left";
    }
    return "unknown";
}

BoxGeometry box_geometry(const Problem& problem) {
    problem.validate();
    BoxGeometry box;
    box.lambda_top = box_lambda_top(problem);
    const int rows = problem.grid.lambda_rows;
    std::vector<double> lambdas(static_cast<std::size_t>(rows) + 1);
    for (int r = 0; r <= rows; ++r) lambdas[static_cast<std::size_t>(r)] = box.lambda_top * r / rows;
    box.delta = delta_start(problem, lambdas);
    return box;
}

std::pair<double, double> side_point(Side side, const BoxGeometry& box, double L, double t) {
    switch (side) {
    case Side::Bottom: return {box.delta + t, 0.0};
    case Side::Right: return {L, t};
    case Side::Top: return {L - t, box.lambda_top};
    case Side::Left: return {box.delta, box.lambda_top - t};
    }
    return {0.0, 0.0};
}

SideResult side_index(const Problem& problem, Side side, const BoxGeometry& box) {
    const Evaluator ev(problem);
    const SideSamples s = sample_side(problem, side, box, ev);
    check_side_leaves(problem, side, box, s);
    SideResult out;
    out.side = side;
    out.rho_min = *std::min_element(s.norms.begin(), s.norms.end());
    try {
        out.path = lift_path(s.path, lift_options(problem), refiner_of(s));
    } catch (const Error& e) {
        // The image jumps by a half-turn below the refinement resolution: the
        // side passes through H1 n H2 within numerical accuracy.
        if (e.kind() != ErrorKind::UndersampledPath || !e.x()) throw;
        const auto [x, lambda] = side_point(side, box, problem.L, *e.x());
        throw Error(ErrorKind::IndexUndefined,
                    std::string("the ") + to_string(side) + " side cannot be lifted near " + location(x, lambda) +
                        "; it passes through H1 n H2 within numerical accuracy",
                    x, lambda);
    }
    out.index = wind(out.path, lift_options(problem));
    return out;
}

SideResult side_index(const Problem& problem, Side side) { return side_index(problem, side, box_geometry(problem)); }

std::vector<double> eigenvalue_crossings(const Problem& problem, double lambda_top) {
    problem.validate();
    const Evaluator ev(problem);
    const BoxGeometry box{0.0, lambda_top};
    const SideSamples s = sample_side(problem, Side::Right, box, ev);
    check_side_leaves(problem, Side::Right, box, s);
    const auto crossings = signed_crossings(s.path, lift_options(problem), refiner_of(s));
    std::vector<double> out;
    for (const auto& c : crossings) {
        const double lambda = std::clamp(c.t, 0.0, lambda_top);
        if (ev.at(problem.L, lambda).norm() < problem.tol.leave)
            throw Error(ErrorKind::IndexUndefined, "double root of psi1(L, .) at " + location(problem.L, lambda),
                        problem.L, lambda);
        if (out.empty() || lambda - out.back() > 1e-8 * std::max(1.0, std::abs(lambda))) out.push_back(lambda);
    }
    return out;
}

std::vector<double> eigenvalue_crossings(const Problem& problem) {
    return eigenvalue_crossings(problem, box_lambda_top(problem));
}

int local_index(int i_minus, int i_plus) { return 2 * (i_minus - i_plus); }

namespace {

// Damped Gauss-Newton on (psi1, psi2) = 0 in scaled coordinates.
struct Polished {
    double x;
    double lambda;
    double residual;
};

Polished polish(const Evaluator& ev, double x, double lambda, double sx, double sl, const Region& bounds) {
    auto F = [&](double px, double pl) { return ev.at(px, pl); };
    PsiPair f = F(x, lambda);
    double mu = 1e-3;
    bool stalled = false;
    for (int it = 0; it < 60 && !stalled && f.norm() > 1e-11; ++it) {
        const double hx = 1e-6 * sx, hl = 1e-6 * sl;
        const PsiPair fx = F(x + hx, lambda);
        const PsiPair fl = F(x, lambda + hl);
        Eigen::Matrix2d J;
        J << (fx.p1 - f.p1) / 1e-6, (fl.p1 - f.p1) / 1e-6,
             (fx.p2 - f.p2) / 1e-6, (fl.p2 - f.p2) / 1e-6;
        const Eigen::Vector2d r(f.p1, f.p2);
        const Eigen::Matrix2d jtj = J.transpose() * J;
        const Eigen::Vector2d g = J.transpose() * r;
        bool improved = false;
        for (int tries = 0; tries < 12; ++tries) {
            Eigen::Matrix2d m = jtj;
            m.diagonal() += mu * (jtj.diagonal().array() + 1e-12).matrix();
            const Eigen::Vector2d step = -m.ldlt().solve(g);
            const double nx = std::clamp(x + step(0) * sx, bounds.x0, bounds.x1);
            const double nl = std::clamp(lambda + step(1) * sl, bounds.lambda0, bounds.lambda1);
            const PsiPair fn = F(nx, nl);
            if (fn.norm() < f.norm()) {
                const double moved = std::hypot((nx - x) / sx, (nl - lambda) / sl);
                x = nx;
                lambda = nl;
                f = fn;
                mu = std::max(mu / 3.0, 1e-12);
                improved = true;
                stalled = moved < 1e-13;
                break;
            }
            mu *= 4.0;
        }
        stalled = stalled || !improved;
    }
    return {x, lambda, f.norm()};
}

int count_sign_changes(const std::vector<double>& v) {
    int count = 0;
    int last = 0;
    for (double value : v) {
        const int s = sign_of(value);
        if (s == 0) continue;
        if (last != 0 && s != last) ++count;
        last = s;
    }
    return count;
}

void classify(const Problem& problem, const Evaluator& ev, LeavePoint& lp, double dx, double dl) {
    const double L = problem.L;
    const double hx = std::min({2.0 * dx, 0.9 * lp.x, 0.9 * (L - lp.x)});
    if (!(hx > 0.0)) {
        lp.resolved = false;
        return;
    }

    // Thin in lambda until the zero branches only cross the top and bottom.
    double hl = 0.5 * dl;
    bool sides_clean = false;
    constexpr int kSide = 9;
    for (int level = 0; level < 12 && !sides_clean; ++level, hl *= 0.25) {
        sides_clean = true;
        for (double xs : {lp.x - hx, lp.x + hx}) {
            std::vector<double> col;
            for (int k = 0; k < kSide; ++k) col.push_back(ev.at(xs, lp.lambda - hl + 2.0 * hl * k / (kSide - 1)).p1);
            if (count_sign_changes(col) != 0 ||
                std::any_of(col.begin(), col.end(), [](double v) { return v == 0.0; }))
                sides_clean = false;
        }
        if (sides_clean) break;
    }

    constexpr int kEdge = 201;
    auto edge = [&](double lambda) {
        FlowIntegrator flow(problem, lambda);
        std::vector<std::pair<double, PsiPair>> out;
        for (int k = 0; k < kEdge; ++k) {
            const double x = lp.x - hx + 2.0 * hx * k / (kEdge - 1);
            out.emplace_back(x, psi_pair(ev.forms(), flow.frame_at(x)));
        }
        return out;
    };
    const auto bottom = edge(lp.lambda - hl);
    const auto top = edge(lp.lambda + hl);
    auto half = [&](const std::vector<std::pair<double, PsiPair>>& e, bool left) {
        std::vector<double> v;
        for (const auto& [x, p] : e)
            if (left ? x <= lp.x : x >= lp.x) v.push_back(p.p1);
        return count_sign_changes(v);
    };
    auto all = [&](const std::vector<std::pair<double, PsiPair>>& e) {
        std::vector<double> v;
        for (const auto& [x, p] : e) v.push_back(p.p1);
        return count_sign_changes(v);
    };
    lp.i_minus = half(bottom, true);
    lp.i_plus = half(top, false);
    lp.local_index = local_index(lp.i_minus, lp.i_plus);
    const int crossing_balance = all(bottom) - all(top);
    lp.kind = lp.i_minus > lp.i_plus ? "maximum" : (lp.i_minus < lp.i_plus ? "minimum" : "intersection");

    // Winding of phi around the thin box, counterclockwise.
    const double w = 2.0 * hx, hgt = 2.0 * hl;
    auto corner_map = [&](double t) -> std::pair<double, double> {
        if (t <= w) return {lp.x - hx + t, lp.lambda - hl};
        if (t <= w + hgt) return {lp.x + hx, lp.lambda - hl + (t - w)};
        if (t <= 2.0 * w + hgt) return {lp.x + hx - (t - w - hgt), lp.lambda + hl};
        return {lp.x - hx, lp.lambda + hl - (t - 2.0 * w - hgt)};
    };
    RP1Path loop;
    for (const auto& [x, p] : bottom) loop.push_back(x - (lp.x - hx), {p.p1, p.p2});
    for (int k = 1; k < kSide; ++k) {
        const double t = w + hgt * k / (kSide - 1);
        const auto [x, l] = corner_map(t);
        const PsiPair p = ev.at(x, l);
        loop.push_back(t, {p.p1, p.p2});
    }
    for (auto it = top.rbegin() + 1; it != top.rend(); ++it)
        loop.push_back(w + hgt + (lp.x + hx - it->first), {it->second.p1, it->second.p2});
    for (int k = 1; k < kSide; ++k) {
        const double t = 2.0 * w + hgt + hgt * k / (kSide - 1);
        const auto [x, l] = corner_map(t);
        const PsiPair p = ev.at(x, l);
        loop.push_back(t, {p.p1, p.p2});
    }
    const Refiner refine = [&](double t) {
        const auto [x, l] = corner_map(t);
        const PsiPair p = ev.at(x, l);
        return RP1Point{p.p1, p.p2};
    };
    try {
        const RP1Path lifted = lift_path(loop, lift_options(problem), refine);
        lp.loop_wind = wind(lifted, lift_options(problem));
    } catch (const Error&) {
        lp.resolved = false;
        return;
    }
    lp.resolved = sides_clean && lp.loop_wind == crossing_balance && crossing_balance == lp.local_index;
}

} // namespace

LeaveScan leave_points_detect(const Problem& problem, const Region& region) {
    problem.validate();
    if (!(region.x1 > region.x0) || !(region.lambda1 > region.lambda0) || region.x0 < 0.0 ||
        region.x1 > problem.L * (1.0 + 1e-12))
        throw Error(ErrorKind::Config, "scan region must be a non-empty sub-rectangle of the box");
    const Evaluator ev(problem);
    const int nc = problem.grid.x_samples;
    const int nr = problem.grid.scan_rows;
    const double dx = (region.x1 - region.x0) / nc;
    const double dl = (region.lambda1 - region.lambda0) / nr;
    const auto cols = static_cast<std::size_t>(nc) + 1;
    const auto rows = static_cast<std::size_t>(nr) + 1;

    std::vector<double> p1(rows * cols), p2(rows * cols);
    parallel_for(rows, [&](std::size_t r) {
        FlowIntegrator flow(problem, region.lambda0 + dl * static_cast<double>(r));
        for (std::size_t c = 0; c < cols; ++c) {
            const double x = c + 1 == cols ? region.x1 : region.x0 + dx * static_cast<double>(c);
            const PsiPair p = psi_pair(ev.forms(), flow.frame_at(x));
            p1[r * cols + c] = p.p1;
            p2[r * cols + c] = p.p2;
        }
    });

    LeaveScan scan;
    auto idx = [&](std::size_t r, std::size_t c) { return r * cols + c; };
    auto norm = [&](std::size_t r, std::size_t c) { return std::hypot(p1[idx(r, c)], p2[idx(r, c)]); };
    scan.rho_min = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const double rho = 0.5 * (p1[idx(r, c)] * p1[idx(r, c)] + p2[idx(r, c)] * p2[idx(r, c)]);
            if (rho < scan.rho_min) {
                scan.rho_min = rho;
                scan.rho_min_x = region.x0 + dx * static_cast<double>(c);
                scan.rho_min_lambda = region.lambda0 + dl * static_cast<double>(r);
            }
        }

    // Candidates: local minima of |(psi1, psi2)| near which both change sign.
    struct Candidate {
        double value;
        std::size_t r, c;
    };
    std::vector<Candidate> candidates;
    auto window = [&](std::size_t r, std::size_t c, int rad, const std::vector<double>& v) {
        bool pos = false, neg = false;
        for (int i = -rad; i <= rad; ++i)
            for (int j = -rad; j <= rad; ++j) {
                const auto rr = static_cast<std::ptrdiff_t>(r) + i;
                const auto cc = static_cast<std::ptrdiff_t>(c) + j;
                if (rr < 0 || cc < 0 || rr >= static_cast<std::ptrdiff_t>(rows) || cc >= static_cast<std::ptrdiff_t>(cols))
                    continue;
                const double value = v[idx(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc))];
                pos = pos || value >= 0.0;
                neg = neg || value <= 0.0;
            }
        return pos && neg;
    };
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = norm(r, c);
            bool is_min = true;
            for (int i = -1; i <= 1 && is_min; ++i)
                for (int j = -1; j <= 1 && is_min; ++j) {
                    const auto rr = static_cast<std::ptrdiff_t>(r) + i;
                    const auto cc = static_cast<std::ptrdiff_t>(c) + j;
                    if ((i == 0 && j == 0) || rr < 0 || cc < 0 || rr >= static_cast<std::ptrdiff_t>(rows) ||
                        cc >= static_cast<std::ptrdiff_t>(cols))
                        continue;
                    if (norm(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)) < v) is_min = false;
                }
            if (is_min && window(r, c, 2, p1) && window(r, c, 2, p2)) candidates.push_back({v, r, c});
        }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
    constexpr std::size_t kMaxCandidates = 64;
    if (candidates.size() > kMaxCandidates) {
        scan.warnings.push_back("leave-point scan truncated to the " + std::to_string(kMaxCandidates) +
                                " most promising candidates");
        candidates.resize(kMaxCandidates);
    }

    // Polishing may step slightly outside the region; points outside are dropped.
    const Region bounds{std::max(region.x0 - 2.0 * dx, 1e-12 * problem.L), std::min(region.x1 + 2.0 * dx, problem.L),
                        region.lambda0 - 2.0 * dl, region.lambda1 + 2.0 * dl};
    std::vector<Polished> polished(candidates.size());
    parallel_for(candidates.size(), [&](std::size_t k) {
        const auto& cand = candidates[k];
        polished[k] = polish(ev, region.x0 + dx * static_cast<double>(cand.c),
                             region.lambda0 + dl * static_cast<double>(cand.r), dx, dl, bounds);
    });

    const double accept = 100.0 * problem.tol.leave;
    for (const auto& p : polished) {
        if (!(p.residual <= accept)) continue;
        const bool inside = p.x >= region.x0 - 1e-9 * problem.L && p.x <= region.x1 + 1e-9 * problem.L &&
                            p.lambda >= region.lambda0 - 1e-9 * std::max(1.0, dl * nr) &&
                            p.lambda <= region.lambda1 + 1e-9 * std::max(1.0, dl * nr);
        if (!inside) continue;
        const bool duplicate = std::any_of(scan.points.begin(), scan.points.end(), [&](const LeavePoint& q) {
            return std::abs(q.x - p.x) <= 1e-4 * dx * nc && std::abs(q.lambda - p.lambda) <= 1e-4 * dl * nr;
        });
        if (duplicate) continue;
        LeavePoint lp;
        lp.x = p.x;
        lp.lambda = p.lambda;
        lp.residual = p.residual;
        scan.points.push_back(lp);
    }
    parallel_for(scan.points.size(), [&](std::size_t k) { classify(problem, ev, scan.points[k], dx, dl); });
    std::sort(scan.points.begin(), scan.points.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
    for (const auto& lp : scan.points)
        if (!lp.resolved) scan.warnings.push_back("unresolved-leave-point at " + location(lp.x, lp.lambda));
    return scan;
}

MorseReport morse_report(int nonnegative, int positive, int cp_closed, int cp_open, int ind_bottom, int m_index) {
    MorseReport m;
    m.nonnegative_eigenvalues = nonnegative;
    m.positive_eigenvalues = positive;
    m.conjugate_points_closed = cp_closed;
    m.conjugate_points_open = cp_open;
    m.ind_bottom = ind_bottom;
    m.m_index = m_index;
    m.bottom_bound = nonnegative >= ind_bottom - m_index;
    m.nonnegative_bound = nonnegative >= cp_closed - m_index;
    m.positive_bound = positive >= cp_open - m_index;
    m.equality = positive == cp_open;
    return m;
}

BoxReport box_index(const Problem& problem, const BoxOptions& options) {
    const BoxGeometry box = box_geometry(problem);
    BoxReport rep;
    rep.delta = box.delta;
    rep.lambda_infinity = box.lambda_top;

    const Side sides[] = {Side::Bottom, Side::Right, Side::Top, Side::Left};
    std::vector<std::future<SideResult>> futures;
    for (Side s : sides)
        futures.push_back(std::async(std::launch::async, [&problem, s, box] { return side_index(problem, s, box); }));
    std::vector<SideResult> results;
    std::exception_ptr first_error;
    for (auto& f : futures) {
        try {
            results.push_back(f.get());
        } catch (...) {
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    rep.ind_bottom = results[0].index;
    rep.ind_right = results[1].index;
    rep.ind_top = results[2].index;
    rep.ind_left = results[3].index;
    rep.m_index = rep.ind_bottom + rep.ind_right + rep.ind_top + rep.ind_left;
    rep.m_bottom_right = rep.ind_bottom + rep.ind_right;
    rep.sides = std::move(results);
    if (rep.ind_top != 0) rep.warnings.push_back("top side has nonzero index; lambda_max may be too small");
    if (rep.ind_left != 0) rep.warnings.push_back("left side has nonzero index; delta may be too large");

    rep.eigenvalues = eigenvalue_crossings(problem, box.lambda_top);
    rep.conjugate_points = conjugate_points(problem, box.delta);
    for (const auto& cp : rep.conjugate_points)
        if (cp.flagged)
            rep.warnings.push_back("conjugate point at x=" + std::to_string(cp.x) + " crosses against the monotone direction");

    const double scale = std::max(1.0, box.lambda_top);
    const int nonneg = static_cast<int>(rep.eigenvalues.size());
    const int pos = static_cast<int>(std::count_if(rep.eigenvalues.begin(), rep.eigenvalues.end(),
                                                   [&](double l) { return l > 1e-8 * scale; }));
    const int cp_closed = static_cast<int>(rep.conjugate_points.size());
    const int cp_open = static_cast<int>(std::count_if(rep.conjugate_points.begin(), rep.conjugate_points.end(),
                                                       [&](const auto& c) { return c.x < problem.L * (1.0 - 1e-8); }));
    rep.morse = morse_report(nonneg, pos, cp_closed, cp_open, rep.ind_bottom, rep.m_index);

    if (options.scan_interior) {
        const LeaveScan scan = leave_points_detect(problem, {box.delta, problem.L, 0.0, box.lambda_top});
        rep.interior_scanned = true;
        rep.rho_min = scan.rho_min;
        rep.warnings.insert(rep.warnings.end(), scan.warnings.begin(), scan.warnings.end());
        int sum = 0;
        bool all_resolved = true;
        for (const auto& lp : scan.points) {
            // Points on the bottom edge or the right edge belong to the sides.
            const bool interior = lp.x > box.delta && lp.x < problem.L * (1.0 - 1e-9) && lp.lambda > 1e-9 * scale &&
                                  lp.lambda < box.lambda_top;
            if (!interior) continue;
            rep.leave_points.push_back(lp);
            sum += lp.local_index;
            all_resolved = all_resolved && lp.resolved;
        }
        rep.interior_clean = rep.leave_points.empty();
        rep.leave_sum_consistent = !all_resolved || sum == rep.m_index;
        if (!rep.leave_sum_consistent)
            rep.warnings.push_back("sum of local indices differs from the boundary index");
        if (rep.interior_clean && rep.m_index != 0)
            rep.warnings.push_back("interior scan found no leave points but the boundary index is nonzero");
    }
    return rep;
}

LargeDiffusionBound sufficient_delta(const Problem& problem, double d_star) {
    if (!(d_star > 0.0)) throw Error(ErrorKind::Config, "d_star must be positive");
    const int n = problem.n();
    const double L = problem.L;
    LargeDiffusionBound b;
    b.lambda_infinity = box_lambda_top(problem);
    // Norms are convex in lambda, so the maximum over [0, lambda_inf] sits at an end.
    b.max_B = std::max(problem.V.max_shifted_norm(0.0, L), problem.V.max_shifted_norm(b.lambda_infinity, L));
    b.C1 = n * (b.max_B + 1.0 / d_star);
    b.C2 = 1.0;
    for (int j = 0; j < n; ++j)
        b.C2 += std::max(problem.V.max_shifted_diagonal(j, 0.0, L),
                         problem.V.max_shifted_diagonal(j, b.lambda_infinity, L)) / d_star;
    const double t = n * (n - 1) / d_star;
    b.C3 = 0.5 * t * t;
    b.C = 2.0 * b.C1 + b.C2 + b.C3;
    b.delta = 2.0 * std::expm1(b.C * L) / b.C;
    b.delta_strict = 2.0 * std::exp(b.C * L) / b.C;
    return b;
}

bool satisfies_large_diffusion(const Eigen::VectorXd& d, double d_star, double delta) {
    for (Eigen::Index j = 0; j < d.size(); ++j) {
        if (d(j) < d_star) return false;
        for (Eigen::Index k = j + 1; k < d.size(); ++k)
            if (d(j) * d(k) < delta) return false;
    }
    return true;
}

} // namespace maslov

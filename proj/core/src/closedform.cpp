#include "maslov/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "maslov/errors.hpp"

namespace maslov {

namespace {

constexpr double kPi = std::numbers::pi;

struct TraceDet {
    double trace;
    double det;
};

// tr B and det B for B = diag(1, d)^-1 (lambda I - A).
TraceDet trace_det(const Eigen::Matrix2d& a, double d, double lambda) {
    const double tr_a = a.trace();
    const double det_a = a.determinant();
    return {(lambda * (1.0 + d) - (a(1, 1) + d * a(0, 0))) / d,
            (lambda * lambda - lambda * tr_a + det_a) / d};
}

// Real roots of mu^2 - t mu + p with the larger-magnitude root computed first.
std::pair<double, double> real_roots(double t, double p, double disc) {
    const double s = std::sqrt(std::max(disc, 0.0));
    const double big = 0.5 * (t + (t >= 0.0 ? s : -s));
    const double small = big != 0.0 ? p / big : 0.0;
    return {std::min(big, small), std::max(big, small)};
}

// beta1/beta2 in the distinct-negative window (> 1).
double beta_ratio(const Eigen::Matrix2d& a, double d, double lambda) {
    const auto b = beta_curves(a, d, lambda, false);
    return b.beta1.real() / b.beta2.real();
}

bool distinct_negative(const Eigen::Matrix2d& a, double d, double lambda) {
    return beta_curves(a, d, lambda, false).classification == BetaClass::DistinctNegative;
}

// Solves beta1/beta2 = target on [lo, hi] where the ratio decreases from
// >= target at lo to 1 at hi.
double solve_ratio(const Eigen::Matrix2d& a, double d, double target, double lo, double hi) {
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!distinct_negative(a, d, mid) || beta_ratio(a, d, mid) < target) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

double merge_radius(double v) { return 1e-8 * std::max(1.0, std::abs(v)); }

std::vector<double> merge_sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v)
        if (out.empty() || x - out.back() > merge_radius(x)) out.push_back(x);
    return out;
}

double turing_margin(const Eigen::Matrix2d& a, double d) {
    return a(1, 1) + d * a(0, 0) - 2.0 * std::sqrt(d * a.determinant());
}

double margin_tolerance(const Eigen::Matrix2d& a, double d) {
    return 1e-12 * (std::abs(a(1, 1)) + d * std::abs(a(0, 0)) + 2.0 * std::sqrt(d * std::abs(a.determinant())));
}

TuringRegime regime_of(const Eigen::Matrix2d& a, double d) {
    const double m = turing_margin(a, d);
    const double tol = margin_tolerance(a, d);
    if (m > tol) return TuringRegime::Above;
    if (m < -tol) return TuringRegime::Below;
    return TuringRegime::Critical;
}

void require_positive_d(double d) {
    if (!(d > 0.0) || !std::isfinite(d)) throw Error(ErrorKind::Config, "diffusion ratio d must be positive");
}

} // namespace

const char* to_string(BetaClass c) noexcept {
    switch (c) {
    case BetaClass::DistinctNegative: return "distinct-negative";
    case BetaClass::EqualNegative: return "equal-negative";
    case BetaClass::ComplexConjugate: return "complex-conjugate";
    case BetaClass::PositiveReal: return "positive-real";
    case BetaClass::Mixed: return "mixed";
    }
    return "unknown";
}

const char* to_string(TuringRegime r) noexcept {
    switch (r) {
    case TuringRegime::Below: return "below";
    case TuringRegime::Critical: return "critical";
    case TuringRegime::Above: return "above";
    }
    return "unknown";
}

bool kinetically_stable(const Eigen::Matrix2d& a) { return a.determinant() > 0.0 && a.trace() < 0.0; }

BetaPair beta_curves(const Eigen::Matrix2d& a, double d, double lambda, bool strict) {
    require_positive_d(d);
    BetaPair out;
    if (!kinetically_stable(a)) {
        if (strict) throw Error(ErrorKind::Config, "not a Turing setup: need det A > 0 and tr A < 0");
        out.warnings.emplace_back("A violates det A > 0, tr A < 0");
    }
    const auto [t, p] = trace_det(a, d, lambda);
    const double disc = t * t - 4.0 * p;
    const double tol = 1e-14 * (t * t + 4.0 * std::abs(p));
    if (disc < -tol) {
        const double im = 0.5 * std::sqrt(-disc);
        out.beta1 = {0.5 * t, -im};
        out.beta2 = {0.5 * t, im};
        out.classification = BetaClass::ComplexConjugate;
        return out;
    }
    const auto [b1, b2] = real_roots(t, p, disc);
    out.beta1 = b1;
    out.beta2 = b2;
    if (std::abs(disc) <= tol) {
        out.classification = t < 0.0 ? BetaClass::EqualNegative : (t > 0.0 ? BetaClass::PositiveReal : BetaClass::Mixed);
    } else if (b2 < 0.0) {
        out.classification = BetaClass::DistinctNegative;
    } else if (b1 > 0.0) {
        out.classification = BetaClass::PositiveReal;
    } else {
        out.classification = BetaClass::Mixed;
    }
    return out;
}

std::complex<double> sinhc(std::complex<double> beta, double x) {
    const std::complex<double> z = beta * (x * x);
    if (std::abs(z) < 1e-4) {
        // x (1 + z/6 + z^2/120 + z^3/5040)
        return x * (1.0 + z / 6.0 * (1.0 + z / 20.0 * (1.0 + z / 42.0)));
    }
    const std::complex<double> r = std::sqrt(beta);
    return std::sinh(r * x) / r;
}

double sinhc(double beta, double x) {
    const double z = beta * x * x;
    if (std::abs(z) < 1e-4) return x * (1.0 + z / 6.0 * (1.0 + z / 20.0 * (1.0 + z / 42.0)));
    if (beta < 0.0) {
        const double r = std::sqrt(-beta);
        return std::sin(r * x) / r;
    }
    const double r = std::sqrt(beta);
    return std::sinh(r * x) / r;
}

std::complex<double> coshc(std::complex<double> beta, double x) {
    const std::complex<double> z = beta * (x * x);
    if (std::abs(z) < 1e-4) return 1.0 + z / 2.0 * (1.0 + z / 12.0 * (1.0 + z / 30.0));
    return std::cosh(std::sqrt(beta) * x);
}

double coshc(double beta, double x) {
    const double z = beta * x * x;
    if (std::abs(z) < 1e-4) return 1.0 + z / 2.0 * (1.0 + z / 12.0 * (1.0 + z / 30.0));
    if (beta < 0.0) return std::cos(std::sqrt(-beta) * x);
    return std::cosh(std::sqrt(beta) * x);
}

PsiClosed psi_closed(std::complex<double> beta1, std::complex<double> beta2, double x) {
    if (beta1.imag() == 0.0 && beta2.imag() == 0.0) {
        const double s1 = sinhc(beta1.real(), x), s2 = sinhc(beta2.real(), x);
        const double c1 = coshc(beta1.real(), x), c2 = coshc(beta2.real(), x);
        return {s1 * s2, s1 * c2 + s2 * c1};
    }
    const auto s1 = sinhc(beta1, x), s2 = sinhc(beta2, x);
    const auto c1 = coshc(beta1, x), c2 = coshc(beta2, x);
    return {(s1 * s2).real(), (s1 * c2 + s2 * c1).real()};
}

Genericity genericity_check(const Eigen::Matrix2d& v, double L) {
    if (!(L > 0.0)) throw Error(ErrorKind::Config, "interval length must be positive");
    Genericity g;
    const double t = v.trace();
    const double p = v.determinant();
    const double disc = t * t - 4.0 * p;
    if (disc < -1e-14 * (t * t + 4.0 * std::abs(p))) {
        // Complex pair: the ratio condition is vacuous and nu1 - nu2 is not real.
        g.complex_eigenvalues = true;
        return g;
    }
    const auto [lo, hi] = real_roots(t, p, disc);
    const double nu1 = hi, nu2 = lo;
    const double scale = L / kPi;

    // Condition (1): nu1/nu2 = (m/n)^2 with 1 <= m <= sqrt(nu1) L/pi, 1 <= n <= sqrt(nu2) L/pi.
    if (nu1 > 0.0 && nu2 > 0.0) {
        const auto m_max = static_cast<long>(std::floor(std::sqrt(nu1) * scale + 1e-9));
        const auto n_max = static_cast<long>(std::floor(std::sqrt(nu2) * scale + 1e-9));
        const double root = std::sqrt(nu1 / nu2);
        for (long n = 1; n <= n_max; ++n) {
            const double mf = root * static_cast<double>(n);
            const long m = std::lround(mf);
            if (m >= 1 && m <= m_max && std::abs(mf - static_cast<double>(m)) <= 1e-9 * std::max(1.0, mf)) {
                g.generic = false;
                g.reason = "eigenvalue ratio nu1/nu2 is the square of m/n within the admissible range";
                g.witness = std::make_pair(m, n);
                return g;
            }
        }
    }

    // Condition (2): c = (nu1 - nu2)(L/pi)^2 = m^2 - n^2 for integers m, n,
    // which holds exactly when c is an integer with c mod 4 != 2.
    const double c = (nu1 - nu2) * scale * scale;
    const double ci = std::round(c);
    if (std::abs(c - ci) <= 1e-9 * std::max(1.0, std::abs(c))) {
        const auto k = static_cast<long>(ci);
        const long r = ((k % 4) + 4) % 4;
        if (r != 2) {
            long m, n;
            if (r == 1 || r == 3) {
                m = (k + 1) / 2;
                n = (k - 1) / 2;
            } else {
                m = k / 4 + 1;
                n = k / 4 - 1;
            }
            g.generic = false;
            g.reason = "nu1 - nu2 equals (m^2 - n^2)(pi/L)^2";
            g.witness = std::make_pair(m, n);
        }
    }
    return g;
}

std::optional<double> d_star(const Eigen::Matrix2d& a) {
    const double a11 = a(0, 0), a22 = a(1, 1);
    const double det = a.determinant();
    if (!(det > 0.0)) return std::nullopt;
    if (a11 <= 0.0 && a22 <= 0.0) return std::nullopt;
    const double sq = std::sqrt(det);

    // a11 s^2 - 2 sqrt(det A) s + a22 = 0 with s = sqrt(d) > 0; a root with
    // s < 0 would be the spurious solution introduced by squaring.
    std::optional<double> s;
    if (a11 == 0.0) {
        if (a22 > 0.0) s = a22 / (2.0 * sq);
    } else {
        const double disc = det - a11 * a22;
        if (disc < 0.0) return std::nullopt;
        const double r = std::sqrt(disc);
        const double big = (sq + r) / a11;
        const double other = big != 0.0 ? (a22 / a11) / big : 0.0;
        for (double cand : {big, other})
            if (cand > 0.0 && (!s || cand > *s)) s = cand;
    }
    if (!s) return std::nullopt;
    const double d_alg = (*s) * (*s);

    // Bisection on the original (unsquared) equality around the algebraic root.
    auto f = [&](double d) { return a22 + d * a11 - 2.0 * std::sqrt(d * det); };
    double lo = 0.5 * d_alg, hi = 2.0 * d_alg;
    if (f(lo) * f(hi) < 0.0) {
        const bool lo_negative = f(lo) < 0.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            if ((f(mid) < 0.0) == lo_negative) lo = mid;
            else hi = mid;
        }
        const double d_bis = 0.5 * (lo + hi);
        if (std::abs(d_bis - d_alg) > 1e-8 * d_alg) return d_bis;
    }
    return d_alg;
}

double lambda_c(const Eigen::Matrix2d& a, double d) {
    require_positive_d(d);
    if (regime_of(a, d) != TuringRegime::Above)
        throw Error(ErrorKind::NotApplicable, "lambda_c exists only above the Turing threshold");
    const double a11 = a(0, 0), a22 = a(1, 1);
    // d^2 Delta_B(lambda) = qa lambda^2 + qb lambda + qc
    const double qa = (d - 1.0) * (d - 1.0);
    const double qb = 2.0 * (d - 1.0) * (a22 - d * a11);
    const double qc = (a22 + d * a11) * (a22 + d * a11) - 4.0 * d * a.determinant();
    const double disc = qb * qb - 4.0 * qa * qc;
    if (qa == 0.0 || disc < 0.0 || qb >= 0.0)
        throw Error(ErrorKind::NotApplicable, "discriminant of B(lambda) has no positive root");
    // Smaller root without cancellation.
    return 2.0 * qc / (-qb + std::sqrt(disc));
}

std::vector<TuringLeavePoint> turing_leave_points(const Eigen::Matrix2d& a, double d, double L,
                                                  double lambda_min) {
    require_positive_d(d);
    std::vector<TuringLeavePoint> out;
    if (!kinetically_stable(a) || regime_of(a, d) != TuringRegime::Above) return out;
    const double lc = lambda_c(a, d);
    if (lambda_min > lc) return out;

    // Maxima (m = n) at lambda_c where beta1 = beta2.
    const double beta_c = 0.5 * trace_det(a, d, lc).trace;
    for (int k = 1;; ++k) {
        const double x = k * kPi / std::sqrt(-beta_c);
        if (x > L) break;
        out.push_back({x, lc, k, k, 2});
    }

    // Intersections (m > n) below lambda_c.
    if (!distinct_negative(a, d, lambda_min))
        throw Error(ErrorKind::NotApplicable, "beta-curves are not distinct negative at lambda_min");
    const double r_min = beta_ratio(a, d, lambda_min);
    const double beta1_min = beta_curves(a, d, lambda_min, false).beta1.real();
    const auto m_max = static_cast<int>(std::floor(L * std::sqrt(-beta1_min) / kPi));
    for (int m = 2; m <= m_max; ++m) {
        for (int n = 1; n < m; ++n) {
            const double target = static_cast<double>(m * m) / static_cast<double>(n * n);
            if (target > r_min) continue;
            const double ls = solve_ratio(a, d, target, lambda_min, lc);
            const double b1 = beta_curves(a, d, ls, false).beta1.real();
            const double x = m * kPi / std::sqrt(-b1);
            if (x <= L) out.push_back({x, ls, m, n, 0});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& p, const auto& q) { return p.x < q.x; });
    return out;
}

std::pair<double, double> L0_window(const Eigen::Matrix2d& a, double d) {
    require_positive_d(d);
    if (!kinetically_stable(a) || regime_of(a, d) != TuringRegime::Above)
        throw Error(ErrorKind::NotApplicable, "the L0 window exists only above the Turing threshold");
    const double lc = lambda_c(a, d);
    const double beta_c = 0.5 * trace_det(a, d, lc).trace;
    const double x_max = kPi / std::sqrt(-beta_c);

    // The (2,1) intersection may sit at negative lambda: widen downwards
    // while the beta-curves stay distinct negative.
    double good = lc;
    double step = std::max(std::abs(lc), 1e-3);
    double lo = lc - step;
    bool found = false;
    for (int it = 0; it < 80 && !found; ++it) {
        if (!distinct_negative(a, d, lo)) {
            // Locate the end of the distinct-negative window and test there.
            double bad = lo;
            for (int k = 0; k < 200 && good - bad > 1e-14 * std::max(1.0, std::abs(good)); ++k) {
                const double mid = 0.5 * (good + bad);
                if (distinct_negative(a, d, mid)) good = mid;
                else bad = mid;
            }
            if (!(beta_ratio(a, d, good) >= 4.0))
                throw Error(ErrorKind::NotApplicable, "no (2,1) intersection of eigenvalue curves");
            lo = good;
            found = true;
        } else if (beta_ratio(a, d, lo) >= 4.0) {
            found = true;
        } else {
            good = lo;
            step *= 2.0;
            lo = lc - step;
        }
    }
    if (!found) throw Error(ErrorKind::NotApplicable, "no (2,1) intersection of eigenvalue curves");
    const double ls = solve_ratio(a, d, 4.0, lo, lc);
    const double x_int = 2.0 * kPi / std::sqrt(-beta_curves(a, d, ls, false).beta1.real());
    return {x_max, x_int};
}

TuringDiagnostics turing_assess(const Eigen::Matrix2d& a, double d, std::optional<double> L, double lambda_min) {
    require_positive_d(d);
    if (!kinetically_stable(a))
        throw Error(ErrorKind::Config, "not a Turing setup: need det A > 0 and tr A < 0");
    TuringDiagnostics t;
    t.margin = turing_margin(a, d);
    t.regime = regime_of(a, d);
    t.d_star = d_star(a);
    if (!t.d_star) t.warnings.emplace_back("a11 <= 0 and a22 <= 0: no finite critical diffusion ratio");
    if (t.regime != TuringRegime::Above) return t;
    t.lambda_c = lambda_c(a, d);
    try {
        const auto w = L0_window(a, d);
        t.x_max = w.first;
        t.x_int = w.second;
        t.L0_window = w;
    } catch (const Error& e) {
        t.warnings.emplace_back(e.what());
        const double beta_c = 0.5 * trace_det(a, d, *t.lambda_c).trace;
        t.x_max = kPi / std::sqrt(-beta_c);
    }
    if (L) t.leave_points = turing_leave_points(a, d, *L, lambda_min);
    return t;
}

std::optional<int> turing_m_index(const Eigen::Matrix2d& a, double d, double L, double delta) {
    if (!kinetically_stable(a) || regime_of(a, d) != TuringRegime::Above) return 0;
    int count = 0;
    for (const auto& p : turing_leave_points(a, d, L * (1.0 + 1e-9), 0.0)) {
        if (std::abs(p.x - L) <= 1e-9 * L || std::abs(p.x - delta) <= 1e-9 * L || p.lambda <= 1e-12)
            return std::nullopt;
        if (p.m == p.n && p.x > delta && p.x < L) ++count;
    }
    return 2 * count;
}

DeltaStarResult delta_star_contains(const Eigen::Matrix2d& a, double d, int q_denominator_limit) {
    DeltaStarResult r;
    if (!distinct_negative(a, d, 0.0)) return r;
    r.ratio = beta_ratio(a, d, 0.0);
    const double root = std::sqrt(r.ratio);
    for (long n = 1; n <= q_denominator_limit; ++n) {
        const long m = std::lround(root * static_cast<double>(n));
        if (m < 1) continue;
        const double q2 = static_cast<double>(m * m) / static_cast<double>(n * n);
        if (std::abs(q2 - r.ratio) <= 1e-9 * r.ratio) {
            const long g = std::gcd(m, n);
            r.contains = true;
            r.witness = std::make_pair(m / g, n / g);
            return r;
        }
    }
    return r;
}

double d_of_q_squared(const Eigen::Matrix2d& a, double q2) {
    const double a11 = a(0, 0), a12 = a(0, 1), a21 = a(1, 0), a22 = a(1, 1);
    const double det = a.determinant();
    if (a11 == 0.0 || !(q2 > 0.0)) throw Error(ErrorKind::NotApplicable, "d(q^2) needs a11 != 0 and q != 0");
    const double q4 = q2 * q2;
    const double inner = det * (1.0 + q2) * (1.0 + q2) * ((1.0 + q4) * det - 2.0 * (a11 * a22 + a21 * a12) * q2);
    if (inner < 0.0) throw Error(ErrorKind::NotApplicable, "no real diffusion ratio for this q");
    return ((1.0 + q4) * det - 2.0 * a21 * a12 * q2 + std::sqrt(inner)) / (2.0 * a11 * q2);
}

std::vector<double> cc_spectrum(const Eigen::MatrixXd& v, const Eigen::VectorXd& d, double L, double lambda_max) {
    if (!(L > 0.0)) throw Error(ErrorKind::Config, "interval length must be positive");
    const double vnorm = Eigen::JacobiSVD<Eigen::MatrixXd>(v).singularValues()(0);
    const double dmin = d.minCoeff();
    std::vector<double> found;
    for (int k = 1;; ++k) {
        const double kappa2 = (k * kPi / L) * (k * kPi / L);
        // Re(eigenvalues) <= ||V|| - kappa^2 min d < 0 from here on.
        if (kappa2 * dmin > vnorm) break;
        const Eigen::MatrixXd m = v - kappa2 * Eigen::MatrixXd(d.asDiagonal());
        Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            const auto ev = es.eigenvalues()(i);
            if (std::abs(ev.imag()) > 1e-10 * scale) continue;
            if (ev.real() >= -1e-12 * scale && ev.real() <= lambda_max) found.push_back(std::max(0.0, ev.real()));
        }
    }
    return merge_sorted(std::move(found));
}

std::vector<double> cc_conjugate_points(const Eigen::MatrixXd& v, const Eigen::VectorXd& d, double L) {
    const Eigen::MatrixXd b = -(d.cwiseInverse().asDiagonal() * v);
    Eigen::EigenSolver<Eigen::MatrixXd> es(b, false);
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    std::vector<double> xs;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const auto beta = es.eigenvalues()(i);
        if (std::abs(beta.imag()) > 1e-10 * scale || beta.real() >= 0.0) continue;
        const double w = std::sqrt(-beta.real());
        for (int k = 1; k * kPi / w <= L * (1.0 + 1e-14); ++k) xs.push_back(k * kPi / w);
    }
    return merge_sorted(std::move(xs));
}

std::vector<CurveSample> eigencurve_samples(const Eigen::MatrixXd& v, const Eigen::VectorXd& d, double L,
                                            int n_max, int samples) {
    std::vector<CurveSample> rows;
    if (n_max <= 0 || samples <= 0) return rows;
    const Eigen::MatrixXd dm = d.asDiagonal();
    for (int k = 1; k <= n_max; ++k) {
        for (int s = 1; s <= samples; ++s) {
            const double x = L * s / samples;
            const double kappa = k * kPi / x;
            Eigen::EigenSolver<Eigen::MatrixXd> es(v - kappa * kappa * dm, false);
            std::vector<double> real;
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
                if (std::abs(es.eigenvalues()(i).imag()) <= 1e-10 * std::max(1.0, std::abs(es.eigenvalues()(i).real())))
                    real.push_back(es.eigenvalues()(i).real());
            std::sort(real.begin(), real.end());
            for (double lam : real) rows.push_back({"eigencurve", x, lam, static_cast<double>(k)});
        }
    }
    return rows;
}

std::vector<CurveSample> detx_samples(const Eigen::MatrixXd& v, const Eigen::VectorXd& d, double L,
                                      double lambda, int samples) {
    std::vector<CurveSample> rows;
    if (samples <= 0) return rows;
    Eigen::MatrixXd shifted = -v;
    shifted.diagonal().array() += lambda;
    const Eigen::MatrixXd b = d.cwiseInverse().asDiagonal() * shifted;
    Eigen::EigenSolver<Eigen::MatrixXd> es(b, false);
    const double dprod = d.prod();
    for (int s = 0; s <= samples; ++s) {
        const double x = L * s / samples;
        std::complex<double> prod = 1.0;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) prod *= sinhc(es.eigenvalues()(i), x);
        rows.push_back({"detX", x, lambda, prod.real() / dprod});
    }
    return rows;
}

void write_curves_csv(std::ostream& out, const std::vector<CurveSample>& rows) {
    out << "kind,x,lambda,value\n" << std::setprecision(17);
    for (const auto& r : rows) out << r.kind << ',' << r.x << ',' << r.lambda << ',' << r.value << '\n';
}

} // namespace maslov

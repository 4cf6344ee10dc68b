#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace maslov {

/// Shape of the eigenvalue pair of B(lambda) = D^-1 (lambda I - A).
enum class BetaClass { DistinctNegative, EqualNegative, ComplexConjugate, PositiveReal, Mixed };

const char* to_string(BetaClass c) noexcept;

/// Eigenvalues of B(lambda), ordered so that beta1 <= beta2 when real
/// (beta1 has negative imaginary part for a conjugate pair).
struct BetaPair {
    std::complex<double> beta1;
    std::complex<double> beta2;
    BetaClass classification = BetaClass::Mixed;
    std::vector<std::string> warnings;
};

/// det A > 0 and tr A < 0: the homogeneous state is stable without diffusion.
bool kinetically_stable(const Eigen::Matrix2d& a);

/// beta-curves of the reaction-diffusion pencil with D = diag(1, d).
/// With strict = true a kinetically unstable A raises ErrorKind::Config;
/// otherwise the pair is returned with a warning attached.
BetaPair beta_curves(const Eigen::Matrix2d& a, double d, double lambda, bool strict = true);

/// sinh(sqrt(beta) x)/sqrt(beta) and cosh(sqrt(beta) x), entire in beta
/// (series below |beta| x^2 < 1e-4).
std::complex<double> sinhc(std::complex<double> beta, double x);
double sinhc(double beta, double x);
std::complex<double> coshc(std::complex<double> beta, double x);
double coshc(double beta, double x);

/// Quantities proportional to (psi1, psi2) for a constant-coefficient
/// Dirichlet start with B-eigenvalues beta1, beta2: det X and the mixed
/// sinh/cosh term. The common positive factor cancels in psi1/psi2.
struct PsiClosed {
    double psi1 = 0.0;
    double psi2 = 0.0;
};
PsiClosed psi_closed(std::complex<double> beta1, std::complex<double> beta2, double x);

/// Result of the genericity test for a constant 2x2 potential.
struct Genericity {
    bool generic = true;
    std::string reason;                       ///< empty when generic
    std::optional<std::pair<long, long>> witness;  ///< (m, n) of the violated condition
    bool complex_eigenvalues = false;         ///< condition (1) vacuous, (2) skipped
};

/// Non-generic when nu1/nu2 = (m/n)^2 within the admissible (m, n) ranges,
/// or when nu1 - nu2 = (m^2 - n^2)(pi/L)^2 for integers m, n (equivalently
/// (nu1 - nu2)(L/pi)^2 is an integer not congruent to 2 mod 4).
Genericity genericity_check(const Eigen::Matrix2d& v, double L);

enum class TuringRegime { Below, Critical, Above };
const char* to_string(TuringRegime r) noexcept;

struct TuringLeavePoint {
    double x = 0.0;
    double lambda = 0.0;
    int m = 0;
    int n = 0;
    int local_index = 0;  ///< 2 when m = n, 0 otherwise
};

struct TuringDiagnostics {
    TuringRegime regime = TuringRegime::Below;
    double margin = 0.0;                 ///< a22 + d a11 - 2 sqrt(d det A)
    std::optional<double> d_star;
    std::optional<double> lambda_c;
    std::optional<double> x_max;
    std::optional<double> x_int;
    std::optional<std::pair<double, double>> L0_window;
    std::vector<TuringLeavePoint> leave_points;
    std::vector<std::string> warnings;
};

/// Critical diffusion ratio solving a22 + d a11 = 2 sqrt(d det A); empty
/// when a11 <= 0 and a22 <= 0. Solved algebraically in sqrt(d) (discarding
/// the spurious root from squaring) and cross-checked by bisection.
std::optional<double> d_star(const Eigen::Matrix2d& a);

/// Regime, d*, lambda_c, the L0 window and (when L is given) the leave
/// points with lambda* >= lambda_min. Throws ErrorKind::Config when A is
/// not kinetically stable.
TuringDiagnostics turing_assess(const Eigen::Matrix2d& a, double d,
                                std::optional<double> L = std::nullopt, double lambda_min = 0.0);

/// Smaller positive root of the discriminant of B(lambda) (regime above).
/// Throws ErrorKind::NotApplicable otherwise.
double lambda_c(const Eigen::Matrix2d& a, double d);

/// Points (x*, lambda*) with x* = m pi/sqrt(-beta1) = n pi/sqrt(-beta2) <= L
/// and lambda* in [lambda_min, lambda_c], sorted by x. Empty outside the
/// regime above.
std::vector<TuringLeavePoint> turing_leave_points(const Eigen::Matrix2d& a, double d, double L,
                                                  double lambda_min = 0.0);

/// (x_max, x_int): first maximum of an eigenvalue curve and first (2,1)
/// intersection. Throws ErrorKind::NotApplicable outside the regime above.
std::pair<double, double> L0_window(const Eigen::Matrix2d& a, double d);

/// Box index predicted by the leave points: twice the number of maxima
/// (m = n) with x* in (delta, L). Empty when a leave point sits on the
/// boundary of the box (index undefined).
std::optional<int> turing_m_index(const Eigen::Matrix2d& a, double d, double L, double delta = 0.0);

struct DeltaStarResult {
    bool contains = false;
    std::optional<std::pair<long, long>> witness;  ///< q = m/n in lowest terms
    double ratio = 0.0;                            ///< beta1(0)/beta2(0)
};

/// Whether beta1(0)/beta2(0) is the square of a rational with denominator
/// at most `q_denominator_limit`.
DeltaStarResult delta_star_contains(const Eigen::Matrix2d& a, double d, int q_denominator_limit);

/// The diffusion ratio d for which beta1(0)/beta2(0) = q2 (root with
/// a22 + d a11 > 0).
double d_of_q_squared(const Eigen::Matrix2d& a, double q2);

/// Sorted distinct real Dirichlet eigenvalues in [0, lambda_max] of
/// D u'' + V u = lambda u on (0, L) with constant V and D: the real
/// eigenvalues of V - (k pi/L)^2 D over all modes k >= 1.
std::vector<double> cc_spectrum(const Eigen::MatrixXd& v, const Eigen::VectorXd& d, double L,
                                double lambda_max);

/// Sorted distinct conjugate points in (0, L] at lambda = 0 for constant
/// V and D: x = k pi / sqrt(-beta) for every negative real eigenvalue beta
/// of -D^-1 V.
std::vector<double> cc_conjugate_points(const Eigen::MatrixXd& v, const Eigen::VectorXd& d, double L);

/// Row of a plotting CSV.
struct CurveSample {
    std::string kind;
    double x = 0.0;
    double lambda = 0.0;
    double value = 0.0;
};

/// Zero curves of psi1: lambda_{k,i}(x) = real eigenvalues of V - (k pi/x)^2 D
/// for k = 1..n_max, sampled at `samples` positions in (0, L]. The value
/// column holds k.
std::vector<CurveSample> eigencurve_samples(const Eigen::MatrixXd& v, const Eigen::VectorXd& d, double L,
                                            int n_max, int samples = 200);

/// det X(x, lambda) = prod_i sinhc(beta_i, x) / prod_j d_j for fixed lambda,
/// at samples + 1 uniform positions in [0, L].
std::vector<CurveSample> detx_samples(const Eigen::MatrixXd& v, const Eigen::VectorXd& d, double L,
                                      double lambda, int samples = 200);

/// CSV with header kind,x,lambda,value; 17 significant digits.
void write_curves_csv(std::ostream& out, const std::vector<CurveSample>& rows);

} // namespace maslov

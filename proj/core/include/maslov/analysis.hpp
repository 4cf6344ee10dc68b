#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "maslov/flow.hpp"
#include "maslov/rp1.hpp"

namespace maslov {

/// Sides of the box [delta, L] x [0, lambda_top], traversed counterclockwise:
/// bottom (x up), right (lambda up), top (x down), left (lambda down).
enum class Side { Bottom, Right, Top, Left };

const char* to_string(Side side) noexcept;

/// Geometry of the box: the start offset and the top row.
struct BoxGeometry {
    double delta = 0.0;
    double lambda_top = 0.0;
};

/// delta from delta_start over grid.lambda_rows + 1 uniform rows, and
/// lambda_top from box_lambda_top.
BoxGeometry box_geometry(const Problem& problem);

/// Image of one side under phi = [psi1 : psi2], lifted to R.
struct SideResult {
    Side side = Side::Bottom;
    int index = 0;
    RP1Path path;        ///< parameter runs along the side (see side_point)
    double rho_min = 0;  ///< min |(psi1, psi2)| over the samples
};

/// (x, lambda) of side parameter t; t starts at 0 at the side's first corner.
std::pair<double, double> side_point(Side side, const BoxGeometry& box, double L, double t);

/// Hyperplane index of one side: the winding of phi along it. Throws
/// ErrorKind::IndexUndefined (with the location) when the side passes
/// through H1 n H2, i.e. |(psi1, psi2)| falls below tol.leave.
SideResult side_index(const Problem& problem, Side side, const BoxGeometry& box);
SideResult side_index(const Problem& problem, Side side);

/// Distinct zeros of psi1(L, .) on [0, lambda_top]: the real eigenvalues,
/// bisection-refined. Throws ErrorKind::IndexUndefined at a double root.
std::vector<double> eigenvalue_crossings(const Problem& problem, double lambda_top);
std::vector<double> eigenvalue_crossings(const Problem& problem);

/// Local index of a small counterclockwise loop around a leave point.
int local_index(int i_minus, int i_plus);

/// A point where the flow leaves the MA space (psi1 = psi2 = 0).
struct LeavePoint {
    double x = 0.0;
    double lambda = 0.0;
    double residual = 0.0;  ///< |(psi1, psi2)| after polishing
    int i_minus = 0;        ///< zero branches increasing to the left
    int i_plus = 0;         ///< zero branches increasing to the right
    int local_index = 0;    ///< 2 (i_minus - i_plus)
    int loop_wind = 0;      ///< winding of a thin loop around the point
    std::string kind;       ///< "maximum", "minimum" or "intersection"
    bool resolved = true;   ///< false when branch count and loop winding disagree
};

struct Region {
    double x0 = 0.0;
    double x1 = 0.0;
    double lambda0 = 0.0;
    double lambda1 = 0.0;
};

/// Summary of the interior scan.
struct LeaveScan {
    std::vector<LeavePoint> points;
    double rho_min = 0.0;            ///< min (psi1^2 + psi2^2)/2 over the grid
    double rho_min_x = 0.0;
    double rho_min_lambda = 0.0;
    std::vector<std::string> warnings;
};

/// Scans `region` on a (grid.x_samples + 1) x (grid.scan_rows + 1) grid for
/// local minima of |(psi1, psi2)|, polishes them with damped Gauss-Newton
/// and classifies each accepted point with a thin box around it. Rows are
/// integrated concurrently.
LeaveScan leave_points_detect(const Problem& problem, const Region& region);

/// Morse-type inequalities relating eigenvalue and conjugate-point counts.
struct MorseReport {
    int nonnegative_eigenvalues = 0;
    int positive_eigenvalues = 0;
    int conjugate_points_closed = 0;  ///< in (0, L]
    int conjugate_points_open = 0;    ///< in (0, L)
    int ind_bottom = 0;
    int m_index = 0;
    bool bottom_bound = false;        ///< nonneg >= ind_bottom - m
    bool nonnegative_bound = false;   ///< nonneg >= #cp(0, L] - m
    bool positive_bound = false;      ///< pos >= #cp(0, L) - m
    bool equality = false;            ///< pos = #cp(0, L)
};

MorseReport morse_report(int nonnegative, int positive, int cp_closed, int cp_open, int ind_bottom,
                         int m_index);

struct BoxOptions {
    bool scan_interior = true;
};

struct BoxReport {
    double delta = 0.0;
    double lambda_infinity = 0.0;  ///< top row of the box actually used
    int ind_bottom = 0;
    int ind_right = 0;
    int ind_top = 0;
    int ind_left = 0;
    int m_index = 0;                ///< sum of the four side indices
    int m_bottom_right = 0;         ///< ind_bottom + ind_right
    std::vector<SideResult> sides;  ///< bottom, right, top, left
    std::vector<ConjugatePoint> conjugate_points;
    std::vector<double> eigenvalues;
    MorseReport morse;
    bool interior_scanned = false;
    bool interior_clean = false;    ///< no leave points found inside
    std::vector<LeavePoint> leave_points;
    double rho_min = 0.0;
    bool leave_sum_consistent = true;  ///< m = sum of interior local indices
    std::vector<std::string> warnings;
};

/// Full box pipeline: geometry, four side indices, eigenvalues, conjugate
/// points, Morse verdicts and (optionally) the interior leave-point scan.
BoxReport box_index(const Problem& problem, const BoxOptions& options = {});

/// Constants of the large-diffusion bound for the Neumann-Dirichlet problem.
struct LargeDiffusionBound {
    double lambda_infinity = 0.0;
    double max_B = 0.0;   ///< max ||lambda I - V(x)|| over the box
    double C1 = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;
    double C = 0.0;
    double delta = 0.0;        ///< 2 (e^{CL} - 1) / C
    double delta_strict = 0.0; ///< (2/C) e^{CL}
};

/// Delta and its constants for lower bound d_star on the diffusion
/// coefficients (the coefficients of `problem.D` are not used).
LargeDiffusionBound sufficient_delta(const Problem& problem, double d_star);

/// d_j >= d_star for all j and d_j d_k >= delta for j != k.
bool satisfies_large_diffusion(const Eigen::VectorXd& d, double d_star, double delta);

} // namespace maslov

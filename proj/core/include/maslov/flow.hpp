#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "maslov/exterior.hpp"

namespace maslov {

enum class BoundaryKind { Dirichlet, Neumann, Robin };

/// Boundary subspace at x = 0 (or x = L): Dirichlet u = 0, Neumann D u' = 0,
/// Robin D u' = Theta u.
struct BoundaryCondition {
    BoundaryKind kind = BoundaryKind::Dirichlet;
    Eigen::MatrixXd theta;  ///< only used for Robin

    static BoundaryCondition dirichlet() { return {}; }
    static BoundaryCondition neumann() { return {BoundaryKind::Neumann, {}}; }
    static BoundaryCondition robin(Eigen::MatrixXd theta) {
        return {BoundaryKind::Robin, std::move(theta)};
    }
};

const char* to_string(BoundaryKind kind) noexcept;

/// Potential V(x): a constant matrix, or matrices sampled on a grid and
/// interpolated linearly (clamped outside the sampled range).
class Potential {
public:
    Potential() = default;

    static Potential constant(Eigen::MatrixXd value);
    static Potential sampled(std::vector<double> xs, std::vector<Eigen::MatrixXd> values);
    /// Named potentials: "zero" and "identity" (any n), "turing" (the 2x2
    /// reaction matrix [[1,-2],[3,-4]]).
    static Potential builtin(const std::string& name, int n);

    int dim() const noexcept { return static_cast<int>(values_.empty() ? 0 : values_.front().rows()); }
    bool is_constant() const noexcept { return xs_.empty(); }
    const std::string& name() const noexcept { return name_; }
    const std::vector<double>& nodes() const noexcept { return xs_; }
    const std::vector<Eigen::MatrixXd>& values() const noexcept { return values_; }

    /// V(x) written into `out` (resized as needed).
    void eval(double x, Eigen::MatrixXd& out) const;
    Eigen::MatrixXd operator()(double x) const;

    /// max over [0, L] of || lambda I - V(x) ||_2. Exact: the norm of a
    /// piecewise-linear matrix function is maximal at a node or endpoint.
    double max_shifted_norm(double lambda, double L) const;

    /// max over [0, L] of |lambda - v_jj(x)|.
    double max_shifted_diagonal(int j, double lambda, double L) const;

private:
    std::string name_ = "constant";
    std::vector<double> xs_;
    std::vector<Eigen::MatrixXd> values_;

    std::vector<Eigen::MatrixXd> values_on(double L) const;
};

struct GridOptions {
    int nx = 2000;            ///< RK4 steps per unit length
    int x_samples = 400;      ///< box columns across [0, L]
    int lambda_rows = 64;     ///< initial box rows across [0, lambda_inf]
    int scan_rows = 400;      ///< interior leave-point scan rows
    int refine_depth = 12;    ///< adaptive row bisection depth
    int qr_every = 10;        ///< re-orthonormalization cadence (steps)
};

struct Tolerances {
    double cross = 1e-9;        ///< RP^1 crossing tolerance
    double root = 1e-10;        ///< relative bisection tolerance for roots
    double leave = 1e-8;        ///< |(psi1, psi2)| below this leaves the MA space
    double delta_floor = 1e-3;  ///< |psi1| floor for Robin/Neumann start offsets
};

/// Eigenvalue problem D u'' + V(x) u = lambda u on (0, L) written as the
/// first-order system for (u, D u'), with boundary subspaces P0 at x = 0 and
/// the Dirichlet subspace at x = L.
struct Problem {
    double L = 1.0;
    Eigen::VectorXd D;
    Potential V;
    BoundaryCondition bc0 = BoundaryCondition::dirichlet();
    BoundaryCondition bc1 = BoundaryCondition::dirichlet();
    GridOptions grid;
    Tolerances tol;
    std::optional<double> lambda_max;  ///< overrides lambda_infinity when set

    int n() const noexcept { return static_cast<int>(D.size()); }

    /// Throws ErrorKind::Config on any violated invariant.
    void validate() const;
};

/// Oriented plane W(x, lambda) at one position, with the normalized
/// hyperplane coordinates computed from an orthonormal basis.
struct FlowSample {
    double x = 0.0;
    Frame frame;         ///< orthonormal, positively oriented
    double psi1 = 0.0;
    double psi2 = 0.0;
    double psi3 = 0.0;
    double gamma = 0.0;  ///< sum_j <A f_j, f_j>
};

/// A(x, lambda) = [[0, D^-1], [lambda I - V(x), 0]].
Eigen::MatrixXd assemble_A(const Problem& problem, double x, double lambda);

/// Frame of a boundary subspace: Dirichlet e_{n..2n-1}, Neumann e_{0..n-1},
/// Robin columns (e_q, Theta e_q).
Frame boundary_frame(const BoundaryCondition& bc, int n);

/// Gram-Schmidt with positive diagonal: an orthonormal frame spanning the
/// same oriented plane. Throws ErrorKind::NumericalFailure on rank loss.
Frame orthonormalize(const Frame& frame);

struct PropagateOptions {
    double step = 0.0;              ///< 0 selects L / ceil(L nx) (with stability cap)
    int qr_every = 0;               ///< 0 selects problem.grid.qr_every
    std::optional<Frame> initial;   ///< replaces boundary_frame(bc0) when set
};

/// Fixed-step RK4 integrator for F' = A(x, lambda) F on the global grid
/// x_k = k h. Values at off-grid positions use one partial step from the
/// preceding node, so every result depends only on (x, h, QR cadence) and
/// not on which other positions were requested. Orthonormalized
/// checkpoints are cached every qr_every steps.
class FlowIntegrator {
public:
    FlowIntegrator(const Problem& problem, double lambda, const PropagateOptions& options = {});

    double lambda() const noexcept { return lambda_; }
    double step() const noexcept { return h_; }
    const Problem& problem() const noexcept { return *problem_; }

    /// Positively oriented (not normalized) frame for W(x, lambda).
    Frame frame_at(double x);

    /// Orthonormalized sample with psi1, psi2, psi3 and gamma.
    FlowSample sample(double x);

    /// Calls `visit(x_k, frame)` for every grid node in [0, x_end] (frames
    /// not normalized), in increasing order.
    void for_each_node(double x_end, const std::function<void(double, const Frame&)>& visit);

    /// Single RK4 step of size dx from (x, F).
    Frame step_from(const Frame& frame, double x, double dx) const;

private:
    const Problem* problem_;
    double lambda_;
    double h_ = 0.0;
    int qr_every_ = 10;
    Eigen::VectorXd dinv_;
    std::vector<Frame> checkpoints_;   // orthonormal frames at nodes q * qr_every_
    StandardForms forms_;

    mutable Eigen::MatrixXd v_tmp_;
    mutable Frame k1_, k2_, k3_, k4_, tmp_;

    void derivative(double x, const Frame& f, Frame& out) const;
    void rk4(double x, double dx, Frame& f) const;
    void ensure_checkpoint(std::size_t q);
};

/// psi samples of W(., lambda) at increasing positions x_targets in [0, L].
std::vector<FlowSample> propagate(const Problem& problem, double lambda,
                                  std::span<const double> x_targets,
                                  const PropagateOptions& options = {});

/// A value of lambda beyond which W(x, lambda) never meets the Dirichlet
/// plane: K + 1 for a Dirichlet start, K + ||Theta||^2 / min d + 1 for
/// Robin/Neumann starts, K = max ||V(x)||_2.
double lambda_infinity(const Problem& problem);

/// lambda_max override when present, lambda_infinity otherwise.
double box_lambda_top(const Problem& problem);

/// Box columns: grid.x_samples + 1 uniform positions on [0, L].
std::vector<double> x_columns(const Problem& problem);

/// Start offset delta (a box column). Dirichlet start: the first column at
/// which psi1 > tol.cross for every lambda in `lambdas`. Robin/Neumann: the
/// largest column <= L/10 such that |psi1| > tol.delta_floor on all
/// columns up to it. Throws ErrorKind::DegenerateProblem when no admissible
/// column exists below L/10.
double delta_start(const Problem& problem, std::span<const double> lambdas);

struct ConjugatePoint {
    double x = 0.0;
    int direction = 0;    ///< sign(psi1' / psi2) at the crossing
    bool flagged = false; ///< true when direction is not +1
};

/// Zeros of psi1(., 0) in (delta, L], bisection-refined to tol.root * L.
/// Throws ErrorKind::IndexUndefined when psi2 also vanishes at a zero.
std::vector<ConjugatePoint> conjugate_points(const Problem& problem, double delta);

struct PsiResidual {
    double psi1 = 0.0;  ///< max |psi1' - (psi2 - gamma psi1)|
    double psi2 = 0.0;  ///< max |psi2' - (sum b_jj/d_j psi1 + psi3 - gamma psi2)|
};

/// Central-difference check of the psi evolution identities on the grid
/// x = h, 2h, ..., L - h. Stencils containing a node of a sampled potential
/// are skipped (V' jumps there, so the difference quotient is only O(h)).
PsiResidual psi_residual(const Problem& problem, double lambda, double h = 1e-3);

} // namespace maslov

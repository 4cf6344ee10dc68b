#include "maslov/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "maslov/errors.hpp"

namespace maslov {

namespace {

double spectral_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// psi1 on a non-normalized frame: det(top block) / sqrt(det(F^T F)).
double normalized_psi1(const Frame& f) {
    const auto n = f.cols();
    const double top = f.topRows(n).determinant();
    const double gram = (f.transpose() * f).determinant();
    return top / std::sqrt(gram);
}

} // namespace

const char* to_string(BoundaryKind kind) noexcept {
    switch (kind) {
    case BoundaryKind::Dirichlet: return "dirichlet";
    case BoundaryKind::Neumann: return "neumann";
    case BoundaryKind::Robin: return "robin";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Potential

Potential Potential::constant(Eigen::MatrixXd value) {
    Potential p;
    p.values_.push_back(std::move(value));
    return p;
}

Potential Potential::sampled(std::vector<double> xs, std::vector<Eigen::MatrixXd> values) {
    if (xs.size() != values.size() || xs.size() < 2)
        throw Error(ErrorKind::Config, "sampled potential needs at least two matching nodes");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw Error(ErrorKind::Config, "potential nodes must increase strictly");
    for (const auto& v : values)
        if (v.rows() != values.front().rows() || v.cols() != v.rows())
            throw Error(ErrorKind::Config, "potential values must be square and of equal size");
    Potential p;
    p.name_ = "sampled";
    p.xs_ = std::move(xs);
    p.values_ = std::move(values);
    return p;
}

Potential Potential::builtin(const std::string& name, int n) {
    Potential p;
    if (name == "zero") {
        p.values_.push_back(Eigen::MatrixXd::Zero(n, n));
    } else if (name == "identity") {
        p.values_.push_back(Eigen::MatrixXd::Identity(n, n));
    } else if (name == "turing") {
        if (n != 2) throw Error(ErrorKind::Config, "builtin potential 'turing' requires n = 2");
        Eigen::MatrixXd a(2, 2);
        a << 1.0, -2.0, 3.0, -4.0;
        p.values_.push_back(a);
    } else {
        throw Error(ErrorKind::Config, "unknown builtin potential '" + name + "'");
    }
    p.name_ = name;
    return p;
}

void Potential::eval(double x, Eigen::MatrixXd& out) const {
    if (xs_.empty()) {
        out = values_.front();
        return;
    }
    if (x <= xs_.front()) {
        out = values_.front();
        return;
    }
    if (x >= xs_.back()) {
        out = values_.back();
        return;
    }
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const auto i = static_cast<std::size_t>(it - xs_.begin()) - 1;
    const double w = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
    out = (1.0 - w) * values_[i] + w * values_[i + 1];
}

Eigen::MatrixXd Potential::operator()(double x) const {
    Eigen::MatrixXd out;
    eval(x, out);
    return out;
}

std::vector<Eigen::MatrixXd> Potential::values_on(double L) const {
    if (xs_.empty()) return values_;
    std::vector<Eigen::MatrixXd> out{(*this)(0.0), (*this)(L)};
    for (std::size_t i = 0; i < xs_.size(); ++i)
        if (xs_[i] > 0.0 && xs_[i] < L) out.push_back(values_[i]);
    return out;
}

double Potential::max_shifted_norm(double lambda, double L) const {
    double best = 0.0;
    for (const auto& v : values_on(L)) {
        Eigen::MatrixXd b = -v;
        b.diagonal().array() += lambda;
        best = std::max(best, spectral_norm(b));
    }
    return best;
}

double Potential::max_shifted_diagonal(int j, double lambda, double L) const {
    double best = 0.0;
    for (const auto& v : values_on(L)) best = std::max(best, std::abs(lambda - v(j, j)));
    return best;
}

// ---------------------------------------------------------------------------
// Problem

void Problem::validate() const {
    if (!(L > 0.0) || !std::isfinite(L)) throw Error(ErrorKind::Config, "interval length L must be positive");
    const int nn = n();
    if (nn < 1) throw Error(ErrorKind::Config, "diffusion vector D must be non-empty");
    for (int j = 0; j < nn; ++j)
        if (!(D(j) > 0.0) || !std::isfinite(D(j)))
            throw Error(ErrorKind::Config, "diffusion coefficients must be positive and finite");
    if (V.dim() != nn) throw Error(ErrorKind::Config, "potential dimension differs from D");
    for (const auto& v : V.values())
        if (!v.allFinite()) throw Error(ErrorKind::Config, "potential contains non-finite values");
    if (!V.is_constant()) {
        const double tol = 1e-12 * std::max(1.0, L);
        if (V.nodes().front() > tol || V.nodes().back() < L - tol)
            throw Error(ErrorKind::Config, "sampled potential must cover [0, L]");
    }
    if (bc1.kind != BoundaryKind::Dirichlet)
        throw Error(ErrorKind::Config, "the boundary condition at x = L must be Dirichlet");
    if (bc0.kind == BoundaryKind::Robin &&
        (bc0.theta.rows() != nn || bc0.theta.cols() != nn || !bc0.theta.allFinite()))
        throw Error(ErrorKind::Config, "Robin matrix must be finite and n x n");
    if (grid.nx < 1 || grid.x_samples < 2 || grid.lambda_rows < 2 || grid.scan_rows < 2 || grid.refine_depth < 0 ||
        grid.qr_every < 1)
        throw Error(ErrorKind::Config, "grid options out of range");
    if (!(tol.cross > 0.0) || !(tol.root > 0.0) || !(tol.leave > 0.0) || !(tol.delta_floor > 0.0))
        throw Error(ErrorKind::Config, "tolerances must be positive");
    if (lambda_max && !(*lambda_max > 0.0))
        throw Error(ErrorKind::Config, "lambda_max must be positive");
}

// ---------------------------------------------------------------------------
// Frames

Eigen::MatrixXd assemble_A(const Problem& problem, double x, double lambda) {
    const int n = problem.n();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    a.topRightCorner(n, n) = problem.D.cwiseInverse().asDiagonal();
    Eigen::MatrixXd b = -problem.V(x);
    b.diagonal().array() += lambda;
    a.bottomLeftCorner(n, n) = b;
    return a;
}

Frame boundary_frame(const BoundaryCondition& bc, int n) {
    Frame f = Frame::Zero(2 * n, n);
    switch (bc.kind) {
    case BoundaryKind::Dirichlet:
        f.bottomRows(n).setIdentity();
        break;
    case BoundaryKind::Neumann:
        f.topRows(n).setIdentity();
        break;
    case BoundaryKind::Robin:
        if (bc.theta.rows() != n || bc.theta.cols() != n)
            throw Error(ErrorKind::Config, "Robin matrix must be n x n");
        f.topRows(n).setIdentity();
        f.bottomRows(n) = bc.theta;
        break;
    }
    return f;
}

Frame orthonormalize(const Frame& frame) {
    Frame q = frame;
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        const double before = q.col(j).norm();
        for (Eigen::Index i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
        // A second pass keeps the basis orthonormal to working precision.
        for (Eigen::Index i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
        const double r = q.col(j).norm();
        if (!(r > 1e-14 * before) || !std::isfinite(r))
            throw Error(ErrorKind::NumericalFailure, "frame lost rank during orthonormalization");
        q.col(j) /= r;
    }
    return q;
}

// ---------------------------------------------------------------------------
// FlowIntegrator

FlowIntegrator::FlowIntegrator(const Problem& problem, double lambda, const PropagateOptions& options)
    : problem_(&problem), lambda_(lambda) {
    const int n = problem.n();
    dinv_ = problem.D.cwiseInverse();
    forms_ = standard_forms(n, problem.D);
    qr_every_ = options.qr_every > 0 ? options.qr_every : problem.grid.qr_every;

    if (options.step > 0.0) {
        h_ = options.step;
    } else {
        double steps = std::ceil(problem.L * problem.grid.nx);
        // Stability cap: keep h times the growth rate of A below 1/2.
        const double rate = std::sqrt(problem.V.max_shifted_norm(lambda, problem.L) * dinv_.maxCoeff());
        steps = std::max(steps, std::ceil(2.0 * problem.L * rate));
        h_ = problem.L / steps;
    }

    Frame initial = options.initial ? *options.initial : boundary_frame(problem.bc0, n);
    if (initial.rows() != 2 * n || initial.cols() != n)
        throw Error(ErrorKind::Config, "initial frame must be 2n x n");
    checkpoints_.push_back(orthonormalize(initial));

    if (problem.V.is_constant()) v_tmp_ = problem.V.values().front();
    k1_.resize(2 * n, n);
    k2_.resize(2 * n, n);
    k3_.resize(2 * n, n);
    k4_.resize(2 * n, n);
    tmp_.resize(2 * n, n);
}

void FlowIntegrator::derivative(double x, const Frame& f, Frame& out) const {
    const int n = problem_->n();
    if (!problem_->V.is_constant()) problem_->V.eval(x, v_tmp_);
    out.topRows(n).noalias() = dinv_.asDiagonal() * f.bottomRows(n);
    out.bottomRows(n).noalias() = -v_tmp_ * f.topRows(n);
    out.bottomRows(n) += lambda_ * f.topRows(n);
}

void FlowIntegrator::rk4(double x, double dx, Frame& f) const {
    derivative(x, f, k1_);
    tmp_ = f + (0.5 * dx) * k1_;
    derivative(x + 0.5 * dx, tmp_, k2_);
    tmp_ = f + (0.5 * dx) * k2_;
    derivative(x + 0.5 * dx, tmp_, k3_);
    tmp_ = f + dx * k3_;
    derivative(x + dx, tmp_, k4_);
    f += (dx / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
}

Frame FlowIntegrator::step_from(const Frame& frame, double x, double dx) const {
    Frame f = frame;
    rk4(x, dx, f);
    return f;
}

void FlowIntegrator::ensure_checkpoint(std::size_t q) {
    while (checkpoints_.size() <= q) {
        Frame f = checkpoints_.back();
        const auto base = static_cast<double>((checkpoints_.size() - 1) * static_cast<std::size_t>(qr_every_));
        for (int s = 0; s < qr_every_; ++s) rk4((base + s) * h_, h_, f);
        checkpoints_.push_back(orthonormalize(f));
    }
}

Frame FlowIntegrator::frame_at(double x) {
    if (!(x >= 0.0) || !std::isfinite(x))
        throw Error(ErrorKind::Config, "flow position must be non-negative", x, lambda_);
    auto k = static_cast<std::size_t>(std::floor(x / h_));
    double dx = x - static_cast<double>(k) * h_;
    if (h_ - dx <= 1e-9 * h_) {
        ++k;
        dx = 0.0;
    } else if (dx <= 1e-9 * h_) {
        dx = 0.0;
    }
    const std::size_t q = k / static_cast<std::size_t>(qr_every_);
    ensure_checkpoint(q);
    Frame f = checkpoints_[q];
    for (std::size_t s = q * static_cast<std::size_t>(qr_every_); s < k; ++s)
        rk4(static_cast<double>(s) * h_, h_, f);
    if (dx != 0.0) rk4(static_cast<double>(k) * h_, dx, f);
    if (!f.allFinite()) throw Error(ErrorKind::NumericalFailure, "non-finite frame", x, lambda_);
    return f;
}

FlowSample FlowIntegrator::sample(double x) {
    const int n = problem_->n();
    FlowSample s;
    s.x = x;
    s.frame = orthonormalize(frame_at(x));
    s.psi1 = evaluate(forms_.omega1, s.frame);
    s.psi2 = evaluate(forms_.omega2, s.frame);
    s.psi3 = n >= 2 ? evaluate(forms_.omega3, s.frame) : 0.0;
    Eigen::MatrixXd v;
    problem_->V.eval(x, v);
    Eigen::MatrixXd b = -v;
    b.diagonal().array() += lambda_;
    const auto top = s.frame.topRows(n);
    const auto bottom = s.frame.bottomRows(n);
    s.gamma = (top.transpose() * dinv_.asDiagonal() * bottom).trace() +
              (bottom.transpose() * b * top).trace();
    return s;
}

void FlowIntegrator::for_each_node(double x_end, const std::function<void(double, const Frame&)>& visit) {
    const auto last = static_cast<std::size_t>(std::floor(x_end / h_ + 1e-9));
    Frame f = checkpoints_.front();
    const auto qr = static_cast<std::size_t>(qr_every_);
    for (std::size_t k = 0; k <= last; ++k) {
        visit(static_cast<double>(k) * h_, f);
        if (k == last) break;
        rk4(static_cast<double>(k) * h_, h_, f);
        if ((k + 1) % qr == 0) {
            const std::size_t q = (k + 1) / qr;
            if (checkpoints_.size() > q) {
                f = checkpoints_[q];
            } else {
                f = orthonormalize(f);
                checkpoints_.push_back(f);
            }
        }
        if (!f.allFinite())
            throw Error(ErrorKind::NumericalFailure, "non-finite frame", static_cast<double>(k) * h_, lambda_);
    }
}

std::vector<FlowSample> propagate(const Problem& problem, double lambda,
                                  std::span<const double> x_targets, const PropagateOptions& options) {
    for (std::size_t i = 0; i < x_targets.size(); ++i) {
        if (x_targets[i] < 0.0 || x_targets[i] > problem.L * (1.0 + 1e-12))
            throw Error(ErrorKind::Config, "propagation targets must lie in [0, L]");
        if (i > 0 && x_targets[i] < x_targets[i - 1])
            throw Error(ErrorKind::Config, "propagation targets must be increasing");
    }
    FlowIntegrator flow(problem, lambda, options);
    std::vector<FlowSample> out;
    out.reserve(x_targets.size());
    for (double x : x_targets) out.push_back(flow.sample(x));
    return out;
}

// ---------------------------------------------------------------------------
// Box geometry

double lambda_infinity(const Problem& problem) {
    const double k = problem.V.max_shifted_norm(0.0, problem.L);
    if (problem.bc0.kind == BoundaryKind::Dirichlet) return k + 1.0;
    double c = 0.0;
    if (problem.bc0.kind == BoundaryKind::Robin) c = spectral_norm(problem.bc0.theta);
    return k + c * c / problem.D.minCoeff() + 1.0;
}

double box_lambda_top(const Problem& problem) {
    return problem.lambda_max ? *problem.lambda_max : lambda_infinity(problem);
}

std::vector<double> x_columns(const Problem& problem) {
    const int m = problem.grid.x_samples;
    std::vector<double> xs(static_cast<std::size_t>(m) + 1);
    for (int j = 0; j <= m; ++j) xs[static_cast<std::size_t>(j)] = problem.L * j / m;
    xs.back() = problem.L;
    return xs;
}

double delta_start(const Problem& problem, std::span<const double> lambdas) {
    const auto cols = x_columns(problem);
    const double limit = problem.L / 10.0 * (1.0 + 1e-12);
    std::size_t last = 0;
    while (last + 1 < cols.size() && cols[last + 1] <= limit) ++last;
    if (last == 0)
        throw Error(ErrorKind::DegenerateProblem, "no box column lies in (0, L/10]");

    const bool dirichlet = problem.bc0.kind == BoundaryKind::Dirichlet;
    // good[j]: the criterion holds at column j for every lambda seen so far.
    std::vector<std::uint8_t> good(last + 1, 1);
    for (double lambda : lambdas) {
        FlowIntegrator flow(problem, lambda);
        for (std::size_t j = 1; j <= last; ++j) {
            const double p = normalized_psi1(flow.frame_at(cols[j]));
            const bool ok = dirichlet ? p > problem.tol.cross : std::abs(p) > problem.tol.delta_floor;
            if (!ok) good[j] = 0;
        }
    }
    if (dirichlet) {
        for (std::size_t j = 1; j <= last; ++j)
            if (good[j]) return cols[j];
        throw Error(ErrorKind::DegenerateProblem,
                    "psi1 does not become positive on all lambda rows before L/10");
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j <= last && good[j]; ++j) best = j;
    if (best == 0)
        throw Error(ErrorKind::DegenerateProblem, "psi1 is not bounded away from zero near x = 0");
    return cols[best];
}

// ---------------------------------------------------------------------------
// Conjugate points

std::vector<ConjugatePoint> conjugate_points(const Problem& problem, double delta) {
    FlowIntegrator flow(problem, 0.0);
    const double L = problem.L;

    struct Node {
        double x;
        double psi1;
    };
    std::vector<Node> nodes;
    nodes.push_back({delta, normalized_psi1(flow.frame_at(delta))});
    flow.for_each_node(L, [&](double x, const Frame& f) {
        if (x > delta && x < L) nodes.push_back({x, normalized_psi1(f)});
    });
    nodes.push_back({L, normalized_psi1(flow.frame_at(L))});

    // A value this small at x = L is an endpoint zero (Dirichlet eigenvalue 0).
    const bool zero_at_end = std::abs(nodes.back().psi1) <= problem.tol.root;
    if (zero_at_end) nodes.back().psi1 = 0.0;

    auto refine = [&](double a, double b, int sa) {
        const double tol = problem.tol.root * L;
        for (int it = 0; it < 200 && b - a > tol; ++it) {
            const double m = 0.5 * (a + b);
            const int sm = sign_of(normalized_psi1(flow.frame_at(m)));
            if (sm == 0) return m;
            if (sm == sa) a = m;
            else b = m;
        }
        return 0.5 * (a + b);
    };

    std::vector<ConjugatePoint> out;
    auto record = [&](double x, int dpsi1) {
        const FlowSample s = flow.sample(x);
        if (std::abs(s.psi2) < problem.tol.leave && std::abs(s.psi1) < problem.tol.leave)
            throw Error(ErrorKind::IndexUndefined,
                        "psi1 and psi2 vanish together along lambda = 0", x, 0.0);
        ConjugatePoint cp;
        cp.x = x;
        cp.direction = dpsi1 * sign_of(s.psi2);
        cp.flagged = cp.direction != 1;
        out.push_back(cp);
    };

    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const int s0 = sign_of(nodes[i].psi1);
        const int s1 = sign_of(nodes[i + 1].psi1);
        if (s0 != 0 && s1 != 0 && s0 != s1) {
            record(refine(nodes[i].x, nodes[i + 1].x, s0), s1 - s0 > 0 ? 1 : -1);
        } else if (s1 == 0 && i + 1 > 0) {
            // Zero exactly at a node (or at x = L): direction from the neighbours.
            const int after = (i + 2 < nodes.size()) ? sign_of(nodes[i + 2].psi1) : -s0;
            record(nodes[i + 1].x, (after - s0) > 0 ? 1 : ((after - s0) < 0 ? -1 : 0));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Identities

PsiResidual psi_residual(const Problem& problem, double lambda, double h) {
    if (!(h > 0.0) || 2.0 * h >= problem.L) throw Error(ErrorKind::Config, "residual step out of range");
    FlowIntegrator flow(problem, lambda);
    const int n = problem.n();
    const auto count = static_cast<std::size_t>(std::floor(problem.L / h + 1e-9));
    std::vector<FlowSample> s;
    s.reserve(count + 1);
    for (std::size_t k = 0; k <= count; ++k) s.push_back(flow.sample(static_cast<double>(k) * h));

    PsiResidual r;
    Eigen::MatrixXd v;
    // Central differences are only second-order where V is smooth; stencils
    // containing a node of a sampled potential (a kink) are skipped.
    const auto& nodes = problem.V.nodes();
    auto straddles_node = [&](double a, double b) {
        const auto it = std::lower_bound(nodes.begin(), nodes.end(), a);
        return it != nodes.end() && *it <= b;
    };
    for (std::size_t k = 1; k + 1 <= count; ++k) {
        if (straddles_node(s[k - 1].x, s[k + 1].x)) continue;
        const double d1 = (s[k + 1].psi1 - s[k - 1].psi1) / (2.0 * h);
        const double d2 = (s[k + 1].psi2 - s[k - 1].psi2) / (2.0 * h);
        problem.V.eval(s[k].x, v);
        double trace_term = 0.0;
        for (int j = 0; j < n; ++j) trace_term += (lambda - v(j, j)) / problem.D(j);
        r.psi1 = std::max(r.psi1, std::abs(d1 - (s[k].psi2 - s[k].gamma * s[k].psi1)));
        r.psi2 = std::max(r.psi2, std::abs(d2 - (trace_term * s[k].psi1 + s[k].psi3 - s[k].gamma * s[k].psi2)));
    }
    return r;
}

} // namespace maslov

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "maslov/errors.hpp"
#include "maslov/flow.hpp"
#include "support.hpp"

namespace {

using namespace maslov;
using namespace maslov::testing;
using std::numbers::pi;

Problem scalar_problem(double nu, double d, double L) {
    return constant_problem(Eigen::MatrixXd::Constant(1, 1, nu), Eigen::VectorXd::Constant(1, d), L);
}

void expect_config_error(const Problem& p) {
    try {
        p.validate();
        FAIL() << "expected Config";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
    }
}

TEST(Potential, SampledInterpolationClamps) {
    const std::vector<double> xs{0.0, 1.0, 3.0};
    const std::vector<Eigen::MatrixXd> vs{Eigen::MatrixXd::Constant(1, 1, 0.0), Eigen::MatrixXd::Constant(1, 1, 2.0),
                                          Eigen::MatrixXd::Constant(1, 1, -2.0)};
    const Potential v = Potential::sampled(xs, vs);
    EXPECT_DOUBLE_EQ(v(0.5)(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(v(2.0)(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(v(5.0)(0, 0), -2.0);
    EXPECT_DOUBLE_EQ(v.max_shifted_norm(0.0, 3.0), 2.0);
    EXPECT_DOUBLE_EQ(v.max_shifted_diagonal(0, 1.0, 3.0), 3.0);
}

TEST(Potential, Builtins) {
    EXPECT_TRUE(Potential::builtin("turing", 2)(0.0).isApprox(turing_matrix()));
    EXPECT_TRUE(Potential::builtin("identity", 3)(1.0).isIdentity());
    EXPECT_THROW((void)Potential::builtin("nope", 2), Error);
}

TEST(Problem, ValidationRejectsBadInput) {
    Problem p = turing_problem(15.5, 10.0);
    EXPECT_NO_THROW(p.validate());

    Problem neumann_end = p;
    neumann_end.bc1 = BoundaryCondition::neumann();
    expect_config_error(neumann_end);

    Problem bad_d = p;
    bad_d.D = Eigen::Vector2d(1.0, -1.0);
    expect_config_error(bad_d);

    Problem bad_dim = p;
    bad_dim.D = Eigen::Vector3d::Ones();
    expect_config_error(bad_dim);

    Problem bad_L = p;
    bad_L.L = 0.0;
    expect_config_error(bad_L);

    Problem bad_robin = p;
    bad_robin.bc0 = BoundaryCondition::robin(Eigen::MatrixXd::Identity(3, 3));
    expect_config_error(bad_robin);
}

TEST(Frames, AssembleAndBoundaryFrames) {
    const Problem p = turing_problem(2.0, 1.0);
    const Eigen::MatrixXd a = assemble_A(p, 0.3, 0.5);
    EXPECT_DOUBLE_EQ(a(0, 2), 1.0);
    EXPECT_DOUBLE_EQ(a(1, 3), 0.5);
    EXPECT_DOUBLE_EQ(a(2, 0), 0.5 - 1.0);
    EXPECT_DOUBLE_EQ(a(3, 0), -3.0);
    EXPECT_TRUE(a.topLeftCorner(2, 2).isZero());

    const Frame dir = boundary_frame(BoundaryCondition::dirichlet(), 2);
    EXPECT_TRUE(dir.topRows(2).isZero());
    EXPECT_TRUE(dir.bottomRows(2).isIdentity());
    const Frame neu = boundary_frame(BoundaryCondition::neumann(), 2);
    EXPECT_TRUE(neu.topRows(2).isIdentity());
    const Eigen::Matrix2d theta = (Eigen::Matrix2d() << 1, 2, 2, 5).finished();
    const Frame rob = boundary_frame(BoundaryCondition::robin(theta), 2);
    EXPECT_TRUE(rob.bottomRows(2).isApprox(theta));
}

TEST(Frames, OrthonormalizeKeepsOrientedPlane) {
    std::mt19937_64 rng(1);
    const Frame f = random_matrix(rng, 6, 3);
    const Frame q = orthonormalize(f);
    EXPECT_TRUE((q.transpose() * q).isIdentity(1e-12));
    // Same plane and orientation: f = q R with det R > 0.
    const Eigen::MatrixXd r = q.transpose() * f;
    EXPECT_TRUE((q * r).isApprox(f, 1e-12));
    EXPECT_GT(r.determinant(), 0.0);
    EXPECT_THROW((void)orthonormalize(Eigen::MatrixXd::Zero(4, 2)), Error);
}

TEST(Flow, ScalarRatioMatchesTangent) {
    // D u'' + nu u = lambda u, u(0) = 0: psi1/psi2 = tan(k x)/k, k^2 = (nu - lambda)/D.
    const double nu = 6.0, d = 1.5, lambda = 0.75;
    const Problem p = scalar_problem(nu, d, 3.0);
    const double k = std::sqrt((nu - lambda) / d);
    FlowIntegrator flow(p, lambda);
    for (double x : {0.1, 0.4, 0.9, 1.7, 2.95}) {
        const FlowSample s = flow.sample(x);
        EXPECT_NEAR(s.psi1 / s.psi2, std::tan(k * x) / k, 1e-9 * (1.0 + std::abs(std::tan(k * x))));
        EXPECT_NEAR(s.psi1 * s.psi1 + s.psi2 * s.psi2 * d * d, 1.0, 1e-9);
    }
}

TEST(Flow, SamplesIndependentOfRequestOrder) {
    const Problem p = turing_problem(15.5, 10.0);
    FlowIntegrator forward(p, 0.01);
    FlowIntegrator backward(p, 0.01);
    const std::vector<double> xs{0.3337, 2.5, 7.77777, 9.99};
    std::vector<FlowSample> a, b(xs.size());
    for (double x : xs) a.push_back(forward.sample(x));
    for (std::size_t k = xs.size(); k-- > 0;) b[k] = backward.sample(xs[k]);
    for (std::size_t k = 0; k < xs.size(); ++k) {
        EXPECT_EQ(a[k].psi1, b[k].psi1);
        EXPECT_EQ(a[k].psi2, b[k].psi2);
    }
    const auto batch = propagate(p, 0.01, xs);
    for (std::size_t k = 0; k < xs.size(); ++k) EXPECT_EQ(batch[k].psi1, a[k].psi1);
}

TEST(Flow, ResidualOfPsiIdentities) {
    const Problem p = turing_problem(15.5, 4.0);
    const PsiResidual r = psi_residual(p, 0.2, 1e-3);
    EXPECT_LT(r.psi1, 1e-6);
    EXPECT_LT(r.psi2, 1e-6);
}

TEST(Flow, LambdaInfinityPerBoundaryKind) {
    Problem p = turing_problem(2.0, 1.0);
    const double k = turing_matrix().operatorNorm();
    EXPECT_NEAR(lambda_infinity(p), k + 1.0, 1e-12);
    p.bc0 = BoundaryCondition::neumann();
    EXPECT_NEAR(lambda_infinity(p), k + 1.0, 1e-12);
    p.bc0 = BoundaryCondition::robin(2.0 * Eigen::Matrix2d::Identity());
    EXPECT_NEAR(lambda_infinity(p), k + 4.0 / 1.0 + 1.0, 1e-12);
    p.lambda_max = 3.0;
    EXPECT_DOUBLE_EQ(box_lambda_top(p), 3.0);
}

TEST(Flow, ConjugatePointsOfScalarProblem) {
    const double nu = 10.0;
    const Problem p = scalar_problem(nu, 1.0, 5.0);
    const auto cps = conjugate_points(p, 0.05);
    const double k = std::sqrt(nu);
    ASSERT_EQ(cps.size(), static_cast<std::size_t>(std::floor(k * 5.0 / pi)));
    for (std::size_t j = 0; j < cps.size(); ++j) {
        EXPECT_NEAR(cps[j].x, (j + 1) * pi / k, 1e-9);
        EXPECT_EQ(cps[j].direction, 1);
        EXPECT_FALSE(cps[j].flagged);
    }
}

TEST(Flow, DeltaStartForNeumannStart) {
    Problem p = scalar_problem(1.0, 1.0, 2.0);
    p.bc0 = BoundaryCondition::neumann();
    const std::vector<double> lambdas{0.0, 1.0, 2.0};
    EXPECT_NEAR(delta_start(p, lambdas), 0.2, 1e-12);

    Problem q = scalar_problem(1.0, 1.0, 2.0);
    const double delta = delta_start(q, lambdas);
    EXPECT_GT(delta, 0.0);
    EXPECT_LE(delta, 0.2);
}

} // namespace

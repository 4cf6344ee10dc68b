#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "maslov/analysis.hpp"
#include "maslov/closedform.hpp"
#include "maslov/errors.hpp"
#include "support.hpp"

namespace {

using namespace maslov;
using namespace maslov::testing;
using std::numbers::pi;

TEST(LocalIndex, TwiceTheBranchDifference) {
    EXPECT_EQ(local_index(1, 0), 2);
    EXPECT_EQ(local_index(0, 1), -2);
    EXPECT_EQ(local_index(1, 1), 0);
}

TEST(Morse, Verdicts) {
    const MorseReport r = morse_report(1, 1, 3, 3, 3, 2);
    EXPECT_TRUE(r.bottom_bound);
    EXPECT_TRUE(r.nonnegative_bound);
    EXPECT_TRUE(r.positive_bound);
    EXPECT_FALSE(r.equality);
    const MorseReport s = morse_report(0, 0, 1, 1, 1, 0);
    EXPECT_FALSE(s.nonnegative_bound);
    EXPECT_FALSE(s.positive_bound);
}

TEST(Box, SidePointsWalkCounterclockwise) {
    const BoxGeometry box{0.5, 3.0};
    const double L = 4.0;
    EXPECT_EQ(side_point(Side::Bottom, box, L, 0.0), std::make_pair(0.5, 0.0));
    EXPECT_EQ(side_point(Side::Right, box, L, 1.0), std::make_pair(4.0, 1.0));
    EXPECT_EQ(side_point(Side::Top, box, L, 1.0), std::make_pair(3.0, 3.0));
    EXPECT_EQ(side_point(Side::Left, box, L, 1.0), std::make_pair(0.5, 2.0));
}

TEST(Box, ScalarSidesCountConjugatePointsAndEigenvalues) {
    // nu = 30, L = 2: conjugate points k pi / sqrt 30 <= 2 for k = 1, 2, 3 and
    // positive eigenvalues 30 - (k pi / 2)^2 for k = 1, 2, 3.
    const double nu = 30.0, L = 2.0;
    Problem p = constant_problem(Eigen::MatrixXd::Constant(1, 1, nu), Eigen::VectorXd::Ones(1), L);
    p.grid.x_samples = 100;
    const BoxReport r = box_index(p, {.scan_interior = false});
    const int cps = static_cast<int>(std::floor(std::sqrt(nu) * L / pi));
    int eigen = 0;
    for (int k = 1; nu - std::pow(k * pi / L, 2) > 0.0; ++k) ++eigen;
    EXPECT_EQ(static_cast<int>(r.conjugate_points.size()), cps);
    EXPECT_EQ(static_cast<int>(r.eigenvalues.size()), eigen);
    EXPECT_EQ(r.ind_bottom, cps);
    EXPECT_EQ(r.ind_right, -eigen);
    EXPECT_EQ(r.m_index, 0);
    EXPECT_EQ(r.m_bottom_right, cps - eigen);
    EXPECT_TRUE(r.morse.equality);
}

TEST(Box, EigenvaluesOfDiagonalProblem) {
    Problem p = constant_problem(Eigen::Vector2d(9.0, 1.0).asDiagonal().toDenseMatrix(), Eigen::Vector2d::Ones(), 2.0);
    const auto ev = eigenvalue_crossings(p, 10.0);
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_NEAR(ev[0], 9.0 - pi * pi / 4.0, 1e-8);
}

TEST(LeaveScan, FindsCurveIntersection) {
    // Zero curves lambda = 9 - (2 pi/x)^2 and lambda = 4 - (pi/x)^2 meet at
    // x = pi sqrt(3/5), lambda = 7/3.
    Problem p = constant_problem(Eigen::Vector2d(9.0, 4.0).asDiagonal().toDenseMatrix(), Eigen::Vector2d::Ones(), 3.0);
    p.grid.x_samples = 150;
    p.grid.scan_rows = 150;
    const LeaveScan scan = leave_points_detect(p, {0.3, 3.0, 0.0, 10.0});
    ASSERT_EQ(scan.points.size(), 1u);
    const LeavePoint& lp = scan.points.front();
    EXPECT_NEAR(lp.x, pi * std::sqrt(0.6), 1e-4);
    EXPECT_NEAR(lp.lambda, 7.0 / 3.0, 1e-4);
    EXPECT_EQ(lp.local_index, 0);
    EXPECT_EQ(lp.kind, "intersection");
}

TEST(LeaveScan, TuringMaximumCarriesIndexTwo) {
    Problem p = turing_problem(15.5, 7.0);
    p.grid.x_samples = 200;
    p.grid.scan_rows = 200;
    const LeaveScan scan = leave_points_detect(p, {0.5, 7.0, 0.0, 0.1});
    ASSERT_EQ(scan.points.size(), 1u);
    EXPECT_NEAR(scan.points[0].x, L0_window(turing_matrix(), 15.5).first, 1e-4);
    EXPECT_EQ(scan.points[0].local_index, 2);
    EXPECT_EQ(scan.points[0].loop_wind, 2);
    EXPECT_EQ(scan.points[0].kind, "maximum");
    EXPECT_TRUE(scan.points[0].resolved);
}

TEST(Box, SideThroughLeavePointIsUndefined) {
    const double x_max = L0_window(turing_matrix(), 15.5).first;
    Problem p = turing_problem(15.5, x_max);
    try {
        (void)side_index(p, Side::Right);
        FAIL() << "expected IndexUndefined";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IndexUndefined);
        ASSERT_TRUE(e.lambda().has_value());
        EXPECT_NEAR(*e.lambda(), lambda_c(turing_matrix(), 15.5), 1e-3);
    }
}

TEST(LargeDiffusion, ConstantsByHand) {
    // V = diag(1, -1), Neumann start: lambda_inf = 2, max ||lambda - V|| = 3.
    Problem p = constant_problem(Eigen::Vector2d(1.0, -1.0).asDiagonal().toDenseMatrix(), Eigen::Vector2d::Ones(), 0.5);
    p.bc0 = BoundaryCondition::neumann();
    const LargeDiffusionBound b = sufficient_delta(p, 2.0);
    EXPECT_DOUBLE_EQ(b.lambda_infinity, 2.0);
    EXPECT_DOUBLE_EQ(b.max_B, 3.0);
    EXPECT_DOUBLE_EQ(b.C1, 7.0);
    EXPECT_DOUBLE_EQ(b.C2, 3.0);
    EXPECT_DOUBLE_EQ(b.C3, 0.5);
    EXPECT_DOUBLE_EQ(b.C, 17.5);
    EXPECT_NEAR(b.delta, 2.0 * std::expm1(17.5 * 0.5) / 17.5, 1e-9 * b.delta);
    EXPECT_NEAR(b.delta_strict, 2.0 / 17.5 * std::exp(17.5 * 0.5), 1e-9 * b.delta_strict);
    EXPECT_LT(b.delta, b.delta_strict);

    EXPECT_TRUE(satisfies_large_diffusion(Eigen::Vector2d(100.0, 100.0), 2.0, 1e4));
    EXPECT_FALSE(satisfies_large_diffusion(Eigen::Vector2d(100.0, 99.0), 2.0, 1e4));
    EXPECT_FALSE(satisfies_large_diffusion(Eigen::Vector3d(1.0, 1e5, 1e5), 2.0, 1e4));
}

} // namespace

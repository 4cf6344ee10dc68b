#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "maslov/errors.hpp"
#include "maslov/exterior.hpp"
#include "support.hpp"

namespace {

using namespace maslov;
using namespace maslov::testing;

KForm random_form(std::mt19937_64& rng, int dim, int degree) {
    KForm f(dim, degree);
    for (Eigen::Index i = 0; i < f.coeffs().size(); ++i) f.coeffs()(i) = uniform(rng, -1.0, 1.0);
    return f;
}

KVector random_vector(std::mt19937_64& rng, int dim, int degree) {
    KVector f(dim, degree);
    for (Eigen::Index i = 0; i < f.coeffs().size(); ++i) f.coeffs()(i) = uniform(rng, -1.0, 1.0);
    return f;
}

TEST(Subsets, RankRoundTrip) {
    for (int dim = 1; dim <= 6; ++dim)
        for (int k = 0; k <= dim; ++k)
            for (std::size_t r = 0; r < subset_count(k, dim); ++r)
                EXPECT_EQ(subset_rank(subset_at(r, k, dim), dim), r);
}

TEST(Subsets, LexicographicOrder) {
    EXPECT_EQ(subset_at(0, 2, 4), (std::vector<int>{0, 1}));
    EXPECT_EQ(subset_at(2, 2, 4), (std::vector<int>{0, 3}));
    EXPECT_EQ(subset_at(5, 2, 4), (std::vector<int>{2, 3}));
    EXPECT_EQ(binomial(6, 3), 20u);
    EXPECT_EQ(binomial(3, 5), 0u);
}

TEST(Wedge, BasisProductsAndSigns) {
    const KForm e0 = basis_form(4, 0), e1 = basis_form(4, 1), e2 = basis_form(4, 2);
    const KForm e01 = wedge(e0, e1);
    EXPECT_DOUBLE_EQ(e01.at({0, 1}), 1.0);
    EXPECT_DOUBLE_EQ(wedge(e1, e0).at({0, 1}), -1.0);
    EXPECT_DOUBLE_EQ(wedge(e2, e01).at({0, 1, 2}), 1.0);
    EXPECT_DOUBLE_EQ(wedge(e1, wedge(e2, e0)).at({0, 1, 2}), 1.0);
    EXPECT_TRUE(wedge(e0, e0).coeffs().isZero());
}

TEST(Wedge, AssociativeAndGradedCommutative) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const KVector a = random_vector(rng, 6, 1), b = random_vector(rng, 6, 2), c = random_vector(rng, 6, 2);
        const KVector left = wedge(wedge(a, b), c), right = wedge(a, wedge(b, c));
        EXPECT_LT((left.coeffs() - right.coeffs()).norm(), 1e-12);
        // deg a * deg b = 2: the product commutes.
        EXPECT_LT((wedge(a, b).coeffs() - wedge(b, a).coeffs()).norm(), 1e-12);
        const KVector d = random_vector(rng, 6, 1);
        EXPECT_LT((wedge(a, d).coeffs() + wedge(d, a).coeffs()).norm(), 1e-12);
    }
}

TEST(Wedge, DegreeOverflowThrows) {
    const KForm a(4, 3), b(4, 2);
    try {
        (void)wedge(a, b);
        FAIL() << "expected InvalidDegree";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidDegree);
    }
}

TEST(Contract, MatchesDefinition) {
    std::mt19937_64 rng(2);
    const KForm omega = random_form(rng, 5, 3);
    const Eigen::VectorXd v = Eigen::VectorXd::Random(5);
    const KForm c = contract(v, omega);
    ASSERT_EQ(c.degree(), 2);
    Frame probe(5, 3);
    for (int trial = 0; trial < 5; ++trial) {
        Frame two = Eigen::MatrixXd::Random(5, 2);
        probe << v, two;
        EXPECT_NEAR(evaluate(c, two), evaluate(omega, probe), 1e-12);
    }
}

TEST(Plucker, RelationForDecomposableTwoVectors) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const Frame f = random_matrix(rng, 4, 2);
        const KVector p = plucker(f);
        const double rel = p.at({0, 1}) * p.at({2, 3}) - p.at({0, 2}) * p.at({1, 3}) + p.at({0, 3}) * p.at({1, 2});
        EXPECT_LT(std::abs(rel), 1e-12 * p.coeffs().squaredNorm());
    }
}

TEST(Evaluate, EqualsDeterminantForBasisForm) {
    std::mt19937_64 rng(4);
    const Frame f = random_matrix(rng, 6, 3);
    const KForm e012 = wedge(wedge(basis_form(6, 0), basis_form(6, 1)), basis_form(6, 2));
    EXPECT_NEAR(evaluate(e012, f), f.topRows(3).determinant(), 1e-12);
    const KForm omega = random_form(rng, 6, 3);
    EXPECT_EQ(evaluate(omega, f), pairing(omega, plucker(f)));
}

TEST(Psi, InvariantUnderChangeOfBasis) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Frame f = random_matrix(rng, 6, 3);
        const Eigen::MatrixXd m = random_matrix(rng, 3, 3);
        const KForm omega = random_form(rng, 6, 3);
        const double base = psi(omega, f);
        const double moved = psi(omega, f * m);
        const double sign = m.determinant() > 0 ? 1.0 : -1.0;
        EXPECT_NEAR(moved, sign * base, 1e-10 * std::max(1.0, std::abs(base)));
    }
}

TEST(Psi, DegenerateFrameThrows) {
    Frame f = Eigen::MatrixXd::Zero(4, 2);
    f(0, 0) = 1.0;
    f(0, 1) = 2.0;
    try {
        (void)psi(wedge(basis_form(4, 0), basis_form(4, 1)), f);
        FAIL() << "expected DegenerateFrame";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateFrame);
    }
}

TEST(Kernel, SymplecticFormHasNoKernel) {
    const KForm w = wedge(basis_form(4, 0), basis_form(4, 2)) + wedge(basis_form(4, 1), basis_form(4, 3));
    EXPECT_EQ(kernel(w).cols(), 0);
    const KForm e01 = wedge(basis_form(4, 0), basis_form(4, 1));
    const Eigen::MatrixXd k = kernel(e01);
    ASSERT_EQ(k.cols(), 2);
    for (int c = 0; c < 2; ++c) EXPECT_TRUE(contract(k.col(c), e01).coeffs().isZero(1e-12));
}

TEST(StandardForms, CoefficientsForTwoComponents) {
    const StandardForms f = standard_forms(2, Eigen::Vector2d(2.0, 4.0));
    EXPECT_DOUBLE_EQ(f.omega1.at({0, 1}), 1.0);
    // e*_2 ^ e*_1 / d_1 + e*_0 ^ e*_3 / d_2
    EXPECT_DOUBLE_EQ(f.omega2.at({1, 2}), -0.5);
    EXPECT_DOUBLE_EQ(f.omega2.at({0, 3}), 0.25);
    EXPECT_DOUBLE_EQ(f.omega3.at({2, 3}), 2.0 / 8.0);
}

TEST(StandardForms, RejectsNonPositiveDiffusion) {
    try {
        (void)standard_forms(2, Eigen::Vector2d(1.0, 0.0));
        FAIL() << "expected Config";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
    }
}

TEST(ContractionVector, ProducesIndependentContractions) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const KForm a = random_form(rng, 6, 3), b = random_form(rng, 6, 3);
        const Eigen::VectorXd v = independent_contraction_vector(a, b);
        const Eigen::VectorXd ca = contract(v, a).coeffs(), cb = contract(v, b).coeffs();
        Eigen::MatrixXd pair(ca.size(), 2);
        pair << ca, cb;
        EXPECT_EQ(Eigen::FullPivLU<Eigen::MatrixXd>(pair).rank(), 2);
    }
}

TEST(ContractionVector, DependentInputThrows) {
    const KForm a = wedge(basis_form(4, 0), basis_form(4, 1));
    try {
        (void)independent_contraction_vector(a, 2.0 * a);
        FAIL() << "expected NoSuchVector";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoSuchVector);
    }
}

TEST(IndexOneLoop, FormsSeparateTheLoop) {
    const StandardForms f = standard_forms(2, Eigen::Vector2d::Ones());
    const IndexOneLoop loop = index_one_loop(f.omega1, f.omega2, 33);
    ASSERT_EQ(loop.frames.size(), 33u);
    for (std::size_t k = 0; k < loop.frames.size(); ++k) {
        const double t = loop.t[k];
        EXPECT_NEAR(evaluate(f.omega1, loop.frames[k]), std::cos(M_PI * t), 1e-12);
        EXPECT_NEAR(evaluate(f.omega2, loop.frames[k]), -std::sin(M_PI * t), 1e-12);
    }
}

TEST(Pfaffian, SquareIsDeterminant) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Matrix4d m = random_matrix(rng, 4, 4);
        const Eigen::Matrix4d a = m - m.transpose();
        EXPECT_NEAR(std::pow(pfaffian4(a), 2), a.determinant(), 1e-12);
        EXPECT_TRUE(to_skew(from_skew(a)).isApprox(a));
    }
}

TEST(Pfaffian, DirichletPencilHasDoubleRoot) {
    const StandardForms f = standard_forms(2, Eigen::Vector2d::Ones());
    const PencilClassification c = pfaffian_classify(to_skew(f.omega1), to_skew(f.omega2));
    EXPECT_EQ(c.type, PencilType::DoubleRoot);
}

TEST(Pfaffian, RejectsNonSkewAndDependentInput) {
    Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
    a(0, 1) = 1.0;
    a(1, 0) = -1.0;
    EXPECT_THROW((void)pfaffian_classify(a, 2.0 * a), Error);
    Eigen::Matrix4d b = a;
    b(2, 3) = 1.0;  // missing the skew partner
    EXPECT_THROW((void)pfaffian_classify(a, b), Error);
}

} // namespace

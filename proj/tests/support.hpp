#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "maslov/flow.hpp"
#include "maslov/rp1.hpp"

namespace maslov::testing {

/// Reaction matrix of the activator-inhibitor example.
inline Eigen::Matrix2d turing_matrix() {
    Eigen::Matrix2d a;
    a << 1.0, -2.0, 3.0, -4.0;
    return a;
}

/// Constant-coefficient Dirichlet problem V = A, D = diag(1, d) on (0, L).
inline Problem turing_problem(double d, double L) {
    Problem p;
    p.L = L;
    p.D = Eigen::Vector2d(1.0, d);
    p.V = Potential::constant(turing_matrix());
    return p;
}

/// Dirichlet problem with constant V and D.
inline Problem constant_problem(const Eigen::MatrixXd& v, const Eigen::VectorXd& d, double L) {
    Problem p;
    p.L = L;
    p.D = d;
    p.V = Potential::constant(v);
    return p;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double lo = -1.0,
                                     double hi = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = uniform(rng, lo, hi);
    return m;
}

inline Eigen::VectorXd random_positive(std::mt19937_64& rng, int n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = uniform(rng, lo, hi);
    return v;
}

/// Representative (cos(theta/2), -sin(theta/2)) of the point whose image
/// under tau is exp(i theta).
inline RP1Point point_at_angle(double theta) {
    return {std::cos(theta / 2.0), -std::sin(theta / 2.0)};
}

/// Path t -> tau^{-1}(exp(i s t)) for t in [t0, t1], s = +1 or -1.
inline RP1Path circle_arc(double t0, double t1, double s, int samples = 65) {
    RP1Path path;
    for (int k = 0; k < samples; ++k) {
        const double t = t0 + (t1 - t0) * k / (samples - 1);
        path.push_back(t, point_at_angle(s * t));
    }
    return path;
}

/// Eigenvalues of B = D^-1 (lambda I - V) for constant V and D.
inline Eigen::VectorXcd b_eigenvalues(const Eigen::MatrixXd& v, const Eigen::VectorXd& d,
                                      double lambda) {
    const Eigen::Index n = v.rows();
    const Eigen::MatrixXd b =
        d.cwiseInverse().asDiagonal() * (lambda * Eigen::MatrixXd::Identity(n, n) - v);
    return Eigen::EigenSolver<Eigen::MatrixXd>(b).eigenvalues();
}

} // namespace maslov::testing

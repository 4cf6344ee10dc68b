#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace maslov {

/// Homogeneous pair [x : y] on the projective line. (0,0) is not a point.
struct RP1Point {
    double x = 0.0;
    double y = 0.0;
};

/// Projective equality: |x y' - y x'| <= tol * |p| * |q|.
bool same_point(RP1Point p, RP1Point q, double tol = 1e-12);

/// The double cover RP^1 -> S^1, tau([x:y]) = ((x - i y)/|x - i y|)^2.
/// The train marker [0:1] maps to -1. Throws ErrorKind::InvalidPoint for (0,0).
std::complex<double> tau(RP1Point p);

/// Principal argument of tau(p), in (-pi, pi].
double tau_angle(RP1Point p);

/// Sampled path in RP^1. After lifting, `theta` holds a continuous angle
/// with exp(i theta) = tau(point) and `on_train` marks samples that sit on
/// [0:1] within the crossing tolerance (their theta is an exact odd
/// multiple of pi).
struct RP1Path {
    std::vector<double> params;
    std::vector<RP1Point> points;
    std::vector<double> theta;
    std::vector<std::uint8_t> on_train;
    bool crossing_free = true;

    std::size_t size() const noexcept { return points.size(); }
    bool lifted() const noexcept { return theta.size() == points.size() && !points.empty(); }
    void push_back(double t, RP1Point p) {
        params.push_back(t);
        points.push_back(p);
    }
};

/// Generator for additional samples requested by adaptive refinement.
/// Must be re-entrant when paths are lifted concurrently.
using Refiner = std::function<RP1Point(double t)>;

struct LiftOptions {
    double eps_cross = 1e-9;        ///< |x| <= eps * |(x,y)| counts as [0:1]
    int max_depth = 40;             ///< bisection depth per original interval
    double refine_threshold = 0.7853981633974483;  ///< pi/4
    /// The sampled (x, y) vary continuously in R^2 (not only in RP^1), so
    /// increments are read from the planar angle and a near half-turn
    /// between samples is still seen as large.
    bool continuous_representative = false;
};

/// Continuous lift of tau along the path. With a refiner, intervals whose
/// angle increment reaches refine_threshold are bisected (new samples are
/// inserted into the returned path); without one, an increment of pi/2 or
/// more raises ErrorKind::UndersampledPath (the error's x() holds the path
/// parameter where the unresolved interval starts). The lift is normalized so that
/// the first crossing of [0:1] sits at theta = pi.
RP1Path lift_path(const RP1Path& path, const LiftOptions& options = {},
                  const Refiner& refiner = {});

/// floor((theta(b) - pi)/2pi) - floor((theta(a) - pi)/2pi) on the lift;
/// lifts the path first (without refinement) when needed.
int wind(const RP1Path& path, const LiftOptions& options = {});

/// Rate of change of the lifted angle at a crossing [0:1]: 2 x'/y.
/// Throws ErrorKind::InvalidPoint when y == 0.
double crossing_derivative(double xprime, double y);

struct Crossing {
    double t = 0.0;          ///< crossing location (refined when possible)
    int sign = 0;            ///< +1 counterclockwise, -1 clockwise, 0 tangential
    bool transverse = true;  ///< false for touching (non-transverse) contacts
};

/// Signed passages of the lift through odd multiples of pi. Crossings
/// strictly between samples are located by bisection through the refiner
/// (or by linear interpolation of theta without one).
std::vector<Crossing> signed_crossings(const RP1Path& path, const LiftOptions& options = {},
                                       const Refiner& refiner = {});

/// Concatenation a * b; the last sample of a must coincide with the first
/// sample of b.
RP1Path concatenate(const RP1Path& a, const RP1Path& b);

/// CSV with header t,x,y[,theta]; 17 significant digits.
void write_path_csv(std::ostream& out, const RP1Path& path);
RP1Path read_path_csv(std::istream& in);

} // namespace maslov

#include "maslov/rp1.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "maslov/errors.hpp"

namespace maslov {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double a) {
    a = std::remainder(a, kTwoPi);  // in [-pi, pi]
    return a;
}

bool is_on_train(RP1Point p, double eps) {
    return std::abs(p.x) <= eps * std::hypot(p.x, p.y);
}

// Sheet index: theta in [pi + 2 pi s, pi + 2 pi (s+1)).
long sheet(const RP1Path& path, std::size_t i) {
    const double u = (path.theta[i] - kPi) / kTwoPi;
    if (path.on_train[i]) return std::lround(u);
    return static_cast<long>(std::floor(u));
}

double level(long j) { return kPi + kTwoPi * static_cast<double>(j); }

} // namespace

bool same_point(RP1Point p, RP1Point q, double tol) {
    return std::abs(p.x * q.y - p.y * q.x) <= tol * std::hypot(p.x, p.y) * std::hypot(q.x, q.y);
}

std::complex<double> tau(RP1Point p) {
    const double r = std::hypot(p.x, p.y);
    if (!(r > 0.0)) throw Error(ErrorKind::InvalidPoint, "(0,0) is not a point of RP^1");
    const std::complex<double> z(p.x / r, -p.y / r);
    return z * z;
}

double tau_angle(RP1Point p) {
    if (p.x == 0.0 && p.y == 0.0) throw Error(ErrorKind::InvalidPoint, "(0,0) is not a point of RP^1");
    // arg((x - iy)^2) = -2 atan2(y, x), folded into (-pi, pi].
    double a = -2.0 * std::atan2(p.y, p.x);
    a = wrap(a);
    if (a <= -kPi) a += kTwoPi;
    return a;
}

RP1Path lift_path(const RP1Path& input, const LiftOptions& options, const Refiner& refiner) {
    if (input.params.size() != input.points.size())
        throw Error(ErrorKind::Config, "path parameters and points differ in length");
    RP1Path path;
    path.params = input.params;
    path.points = input.points;
    const std::size_t n0 = path.points.size();
    if (n0 == 0) return path;

    std::vector<double> angle(n0);
    for (std::size_t i = 0; i < n0; ++i) angle[i] = tau_angle(path.points[i]);
    // Increment of the lifted angle between two samples.
    auto increment = [&](RP1Point a, RP1Point b, double angle_a, double angle_b) {
        if (!options.continuous_representative) return wrap(angle_b - angle_a);
        return -2.0 * wrap(std::atan2(b.y, b.x) - std::atan2(a.y, a.x));
    };
    std::vector<int> depth(n0, 0);

    path.theta.assign(1, angle[0]);
    constexpr double kLimit = kPi / 2.0;
    for (std::size_t i = 0; i + 1 < path.points.size();) {
        const double d = increment(path.points[i], path.points[i + 1], angle[i], angle[i + 1]);
        const int next_depth = std::max(depth[i], depth[i + 1]) + 1;
        if (std::abs(d) >= options.refine_threshold && refiner && next_depth <= options.max_depth) {
            const double tm = 0.5 * (path.params[i] + path.params[i + 1]);
            const RP1Point pm = refiner(tm);
            const auto pos = static_cast<std::ptrdiff_t>(i + 1);
            path.params.insert(path.params.begin() + pos, tm);
            path.points.insert(path.points.begin() + pos, pm);
            angle.insert(angle.begin() + pos, tau_angle(pm));
            depth.insert(depth.begin() + pos, next_depth);
            continue;
        }
        if (std::abs(d) >= kLimit) {
            throw Error(ErrorKind::UndersampledPath,
                        "angle increment of " + std::to_string(d) + " rad between t=" +
                            std::to_string(path.params[i]) + " and t=" +
                            std::to_string(path.params[i + 1]) + " cannot be resolved",
                        path.params[i]);
        }
        path.theta.push_back(path.theta.back() + d);
        ++i;
    }

    const std::size_t n = path.points.size();
    path.on_train.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (is_on_train(path.points[i], options.eps_cross)) {
            path.on_train[i] = 1;
            path.theta[i] = level(std::lround((path.theta[i] - kPi) / kTwoPi));
        }
    }

    // Locate the first crossing and shift so that it sits at theta = pi.
    std::optional<long> first;
    for (std::size_t i = 0; i < n && !first; ++i) {
        if (path.on_train[i]) {
            first = sheet(path, i);
        } else if (i + 1 < n && !path.on_train[i + 1]) {
            const long a = sheet(path, i);
            const long b = sheet(path, i + 1);
            if (a != b) first = std::max(a, b);
        }
    }
    path.crossing_free = !first.has_value();
    if (first && *first != 0) {
        const double shift = kTwoPi * static_cast<double>(*first);
        for (std::size_t i = 0; i < n; ++i) {
            if (path.on_train[i])
                path.theta[i] = level(std::lround((path.theta[i] - kPi) / kTwoPi) - *first);
            else
                path.theta[i] -= shift;
        }
    }
    return path;
}

int wind(const RP1Path& path, const LiftOptions& options) {
    if (!path.lifted() || path.on_train.size() != path.points.size()) {
        if (path.points.empty()) return 0;
        return wind(lift_path(path, options), options);
    }
    return static_cast<int>(sheet(path, path.size() - 1) - sheet(path, 0));
}

double crossing_derivative(double xprime, double y) {
    if (y == 0.0) throw Error(ErrorKind::InvalidPoint, "crossing derivative requires y != 0");
    return 2.0 * xprime / y;
}

std::vector<Crossing> signed_crossings(const RP1Path& input, const LiftOptions& options,
                                       const Refiner& refiner) {
    const RP1Path path = (input.lifted() && input.on_train.size() == input.points.size())
                             ? input
                             : lift_path(input, options, refiner);
    std::vector<Crossing> out;
    const std::size_t n = path.size();
    std::size_t i = 0;
    while (i < n) {
        if (path.on_train[i]) {
            std::size_t j = i;
            while (j + 1 < n && path.on_train[j + 1]) ++j;
            const double lv = path.theta[i];
            const bool has_before = i > 0;
            const bool has_after = j + 1 < n;
            int sign = 0;
            if (has_before && has_after) {
                const double b = path.theta[i - 1];
                const double a = path.theta[j + 1];
                if (b < lv && lv < a) sign = 1;
                else if (b > lv && lv > a) sign = -1;
            } else if (has_after) {
                sign = path.theta[j + 1] > lv ? 1 : -1;
            } else if (has_before) {
                sign = path.theta[i - 1] < lv ? 1 : -1;
            }
            out.push_back({path.params[i], sign, sign != 0});
            i = j + 1;
            continue;
        }
        if (i + 1 < n && !path.on_train[i + 1]) {
            const long s0 = sheet(path, i);
            const long s1 = sheet(path, i + 1);
            if (s0 != s1) {
                const double lv = level(std::max(s0, s1));
                double ta = path.params[i];
                double tb = path.params[i + 1];
                double t_cross;
                if (refiner) {
                    // Bisection on the lifted angle relative to sample i.
                    const double theta0 = path.theta[i];
                    const double angle0 = tau_angle(path.points[i]);
                    const bool rising = s1 > s0;
                    for (int it = 0; it < 80 && tb - ta > 1e-15 * std::max(1.0, std::abs(tb)); ++it) {
                        const double tm = 0.5 * (ta + tb);
                        const double th = theta0 + wrap(tau_angle(refiner(tm)) - angle0);
                        if ((th < lv) == rising) ta = tm;
                        else tb = tm;
                    }
                    t_cross = 0.5 * (ta + tb);
                } else {
                    const double th0 = path.theta[i];
                    const double th1 = path.theta[i + 1];
                    t_cross = ta + (tb - ta) * (lv - th0) / (th1 - th0);
                }
                out.push_back({t_cross, s1 > s0 ? 1 : -1, true});
            }
        }
        ++i;
    }
    return out;
}

RP1Path concatenate(const RP1Path& a, const RP1Path& b) {
    if (a.points.empty()) return b;
    if (b.points.empty()) return a;
    if (a.params.back() != b.params.front() || !same_point(a.points.back(), b.points.front()))
        throw Error(ErrorKind::Config, "paths do not join end to start");
    RP1Path out;
    out.params = a.params;
    out.points = a.points;
    out.params.insert(out.params.end(), b.params.begin() + 1, b.params.end());
    out.points.insert(out.points.end(), b.points.begin() + 1, b.points.end());
    return out;
}

void write_path_csv(std::ostream& out, const RP1Path& path) {
    const bool with_theta = path.lifted();
    out << (with_theta ? "t,x,y,theta\n" : "t,x,y\n");
    out << std::setprecision(17);
    for (std::size_t i = 0; i < path.size(); ++i) {
        out << path.params[i] << ',' << path.points[i].x << ',' << path.points[i].y;
        if (with_theta) out << ',' << path.theta[i];
        out << '\n';
    }
}

RP1Path read_path_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::Config, "empty path CSV");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            header.push_back(cell);
        }
    }
    auto column = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    };
    const int ct = column("t"), cx = column("x"), cy = column("y");
    if (ct < 0 || cx < 0 || cy < 0) throw Error(ErrorKind::Config, "path CSV needs columns t,x,y");

    RP1Path path;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::vector<double> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                cells.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                throw Error(ErrorKind::Config, "non-numeric value on CSV line " + std::to_string(lineno));
            }
        }
        if (cells.size() < header.size())
            throw Error(ErrorKind::Config, "short row on CSV line " + std::to_string(lineno));
        path.push_back(cells[static_cast<std::size_t>(ct)],
                       {cells[static_cast<std::size_t>(cx)], cells[static_cast<std::size_t>(cy)]});
    }
    for (std::size_t i = 1; i < path.params.size(); ++i)
        if (!(path.params[i] > path.params[i - 1]))
            throw Error(ErrorKind::Config, "path parameters must be strictly increasing");
    return path;
}

} // namespace maslov

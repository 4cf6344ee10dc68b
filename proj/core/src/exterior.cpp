#include "maslov/exterior.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <utility>

#include "maslov/errors.hpp"

namespace maslov {

namespace {

using SubsetTable = std::vector<std::vector<int>>;

// Enumerates the k-subsets of {0..dim-1} in lexicographic order.
SubsetTable build_subsets(int k, int dim) {
    SubsetTable out;
    out.reserve(binomial(dim, k));
    std::vector<int> cur(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) cur[static_cast<std::size_t>(i)] = i;
    if (k == 0) {
        out.emplace_back();
        return out;
    }
    while (true) {
        out.push_back(cur);
        int p = k - 1;
        while (p >= 0 && cur[static_cast<std::size_t>(p)] == dim - k + p) --p;
        if (p < 0) break;
        ++cur[static_cast<std::size_t>(p)];
        for (int q = p + 1; q < k; ++q)
            cur[static_cast<std::size_t>(q)] = cur[static_cast<std::size_t>(q - 1)] + 1;
    }
    return out;
}

const SubsetTable& subsets(int k, int dim) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<SubsetTable>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{k, dim}];
    if (!slot) slot = std::make_unique<SubsetTable>(build_subsets(k, dim));
    return *slot;
}

std::uint64_t mask_of(const std::vector<int>& s) {
    std::uint64_t m = 0;
    for (int i : s) m |= (std::uint64_t{1} << i);
    return m;
}

std::vector<int> indices_of(std::uint64_t mask) {
    std::vector<int> out;
    while (mask) {
        out.push_back(std::countr_zero(mask));
        mask &= mask - 1;
    }
    return out;
}

void check_indices(std::span<const int> indices, int dim) {
    for (std::size_t p = 0; p < indices.size(); ++p) {
        if (indices[p] < 0 || indices[p] >= dim || (p > 0 && indices[p] <= indices[p - 1]))
            throw Error(ErrorKind::InvalidDegree,
                        "multi-index must be strictly increasing within 0..dim-1");
    }
}

// Minor of `m` on the given rows (all columns).
double minor_on_rows(const Frame& m, const std::vector<int>& rows) {
    const auto k = static_cast<Eigen::Index>(rows.size());
    auto r = [&](Eigen::Index i) { return rows[static_cast<std::size_t>(i)]; };
    switch (k) {
    case 0: return 1.0;
    case 1: return m(r(0), 0);
    case 2: return m(r(0), 0) * m(r(1), 1) - m(r(0), 1) * m(r(1), 0);
    case 3:
        return m(r(0), 0) * (m(r(1), 1) * m(r(2), 2) - m(r(1), 2) * m(r(2), 1)) -
               m(r(0), 1) * (m(r(1), 0) * m(r(2), 2) - m(r(1), 2) * m(r(2), 0)) +
               m(r(0), 2) * (m(r(1), 0) * m(r(2), 1) - m(r(1), 1) * m(r(2), 0));
    default: {
        Eigen::MatrixXd sub(k, k);
        for (Eigen::Index i = 0; i < k; ++i) sub.row(i) = m.row(r(i));
        return Eigen::PartialPivLU<Eigen::MatrixXd>(sub).determinant();
    }
    }
}

bool independent_pair(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() == 0) return false;
    Eigen::MatrixXd m(a.size(), 2);
    m.col(0) = a;
    m.col(1) = b;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    return s(0) > 0.0 && s(1) > 1e-10 * s(0);
}

} // namespace

std::size_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::size_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
    return r;
}

std::size_t subset_rank(std::span<const int> indices, int dim) {
    check_indices(indices, dim);
    const int k = static_cast<int>(indices.size());
    std::size_t rank = 0;
    int prev = -1;
    for (int p = 0; p < k; ++p) {
        for (int j = prev + 1; j < indices[static_cast<std::size_t>(p)]; ++j)
            rank += binomial(dim - 1 - j, k - 1 - p);
        prev = indices[static_cast<std::size_t>(p)];
    }
    return rank;
}

const std::vector<int>& subset_at(std::size_t rank, int k, int dim) {
    const auto& table = subsets(k, dim);
    if (rank >= table.size()) throw Error(ErrorKind::InvalidDegree, "subset rank out of range");
    return table[rank];
}

// ---------------------------------------------------------------------------
// Graded

template <class Tag>
Graded<Tag>::Graded(int dim, int degree) : dim_(dim), degree_(degree) {
    if (dim < 0 || degree < 0 || degree > dim || dim > 62)
        throw Error(ErrorKind::InvalidDegree, "degree must lie in 0..dim");
    coeffs_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(binomial(dim, degree)));
}

template <class Tag>
Graded<Tag>::Graded(int dim, int degree, Eigen::VectorXd coeffs) : Graded(dim, degree) {
    if (coeffs.size() != coeffs_.size())
        throw Error(ErrorKind::InvalidDegree, "coefficient vector has the wrong length");
    coeffs_ = std::move(coeffs);
}

template <class Tag>
Graded<Tag> Graded<Tag>::basis(int dim, std::span<const int> indices) {
    Graded g(dim, static_cast<int>(indices.size()));
    g.coeffs_(static_cast<Eigen::Index>(subset_rank(indices, dim))) = 1.0;
    return g;
}

template <class Tag>
double Graded<Tag>::at(std::span<const int> indices) const {
    if (static_cast<int>(indices.size()) != degree_)
        throw Error(ErrorKind::InvalidDegree, "multi-index length differs from degree");
    return coeffs_(static_cast<Eigen::Index>(subset_rank(indices, dim_)));
}

template <class Tag>
double Graded<Tag>::at(std::initializer_list<int> indices) const {
    return at(std::span<const int>(indices.begin(), indices.size()));
}

template <class Tag>
Graded<Tag>& Graded<Tag>::operator+=(const Graded& other) {
    if (other.dim_ != dim_ || other.degree_ != degree_)
        throw Error(ErrorKind::InvalidDegree, "cannot add elements of different shape");
    coeffs_ += other.coeffs_;
    return *this;
}

template <class Tag>
Graded<Tag>& Graded<Tag>::operator-=(const Graded& other) {
    if (other.dim_ != dim_ || other.degree_ != degree_)
        throw Error(ErrorKind::InvalidDegree, "cannot subtract elements of different shape");
    coeffs_ -= other.coeffs_;
    return *this;
}

template <class Tag>
Graded<Tag>& Graded<Tag>::operator*=(double s) {
    coeffs_ *= s;
    return *this;
}

template class Graded<VectorTag>;
template class Graded<FormTag>;

template <class Tag>
Graded<Tag> wedge(const Graded<Tag>& a, const Graded<Tag>& b) {
    if (a.dim() != b.dim())
        throw Error(ErrorKind::InvalidDegree, "wedge of elements over different spaces");
    const int dim = a.dim();
    const int deg = a.degree() + b.degree();
    if (deg > dim) throw Error(ErrorKind::InvalidDegree, "wedge degree exceeds ambient dimension");
    Graded<Tag> out(dim, deg);
    const auto& sa = subsets(a.degree(), dim);
    const auto& sb = subsets(b.degree(), dim);
    for (std::size_t i = 0; i < sa.size(); ++i) {
        const double ai = a.coeffs()(static_cast<Eigen::Index>(i));
        if (ai == 0.0) continue;
        const std::uint64_t mi = mask_of(sa[i]);
        for (std::size_t j = 0; j < sb.size(); ++j) {
            const double bj = b.coeffs()(static_cast<Eigen::Index>(j));
            if (bj == 0.0) continue;
            const std::uint64_t mj = mask_of(sb[j]);
            if (mi & mj) continue;
            // Sign of the shuffle: one transposition per pair (p in I, q in J) with p > q.
            int inversions = 0;
            for (int q : sb[j]) inversions += std::popcount(mi >> (q + 1));
            const double sign = (inversions % 2 == 0) ? 1.0 : -1.0;
            const auto merged = indices_of(mi | mj);
            out.coeffs()(static_cast<Eigen::Index>(subset_rank(merged, dim))) += sign * ai * bj;
        }
    }
    return out;
}

template KVector wedge(const KVector&, const KVector&);
template KForm wedge(const KForm&, const KForm&);

KForm basis_form(int dim, int i) {
    const int idx[1] = {i};
    return KForm::basis(dim, idx);
}

KForm contract(const Eigen::VectorXd& v, const KForm& omega) {
    if (omega.degree() < 1) throw Error(ErrorKind::InvalidDegree, "cannot contract a 0-form");
    if (v.size() != omega.dim())
        throw Error(ErrorKind::InvalidDegree, "contraction vector has the wrong dimension");
    const int dim = omega.dim();
    const int k = omega.degree();
    KForm out(dim, k - 1);
    const auto& table = subsets(k, dim);
    std::vector<int> rest(static_cast<std::size_t>(k - 1));
    for (std::size_t r = 0; r < table.size(); ++r) {
        const double w = omega.coeffs()(static_cast<Eigen::Index>(r));
        if (w == 0.0) continue;
        const auto& idx = table[r];
        for (int p = 0; p < k; ++p) {
            const double vi = v(idx[static_cast<std::size_t>(p)]);
            if (vi == 0.0) continue;
            std::size_t q = 0;
            for (int s = 0; s < k; ++s)
                if (s != p) rest[q++] = idx[static_cast<std::size_t>(s)];
            const double sign = (p % 2 == 0) ? 1.0 : -1.0;
            out.coeffs()(static_cast<Eigen::Index>(subset_rank(rest, dim))) += sign * vi * w;
        }
    }
    return out;
}

KVector plucker(const Frame& frame) {
    const int dim = static_cast<int>(frame.rows());
    const int n = static_cast<int>(frame.cols());
    KVector out(dim, n);
    const auto& table = subsets(n, dim);
    for (std::size_t r = 0; r < table.size(); ++r)
        out.coeffs()(static_cast<Eigen::Index>(r)) = minor_on_rows(frame, table[r]);
    return out;
}

double pairing(const KForm& omega, const KVector& xi) {
    if (omega.dim() != xi.dim() || omega.degree() != xi.degree())
        throw Error(ErrorKind::InvalidDegree, "pairing of elements with different shapes");
    // Sequential sum over non-zero coefficients, the same order evaluate() uses.
    double sum = 0.0;
    for (Eigen::Index r = 0; r < omega.coeffs().size(); ++r) {
        const double w = omega.coeffs()(r);
        if (w != 0.0) sum += w * xi.coeffs()(r);
    }
    return sum;
}

double evaluate(const KForm& omega, const Frame& frame) {
    if (omega.dim() != frame.rows() || omega.degree() != frame.cols())
        throw Error(ErrorKind::InvalidDegree, "form degree does not match the frame");
    const auto& table = subsets(omega.degree(), omega.dim());
    double sum = 0.0;
    for (std::size_t r = 0; r < table.size(); ++r) {
        const double w = omega.coeffs()(static_cast<Eigen::Index>(r));
        if (w != 0.0) sum += w * minor_on_rows(frame, table[r]);
    }
    return sum;
}

double psi(const KForm& omega, const Frame& frame) {
    if (frame.cols() == 0) return omega.coeffs()(0);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(frame);
    const auto& s = svd.singularValues();
    if (!(s(0) > 0.0) || s(s.size() - 1) <= 1e-10 * s(0))
        throw Error(ErrorKind::DegenerateFrame, "frame does not have full column rank");
    const double volume = s.prod();  // sqrt(det(F^T F))
    return evaluate(omega, frame) / volume;
}

Eigen::MatrixXd kernel(const KForm& omega) {
    if (omega.degree() < 1) throw Error(ErrorKind::InvalidDegree, "kernel of a 0-form");
    const int dim = omega.dim();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(binomial(dim, omega.degree() - 1)), dim);
    for (int i = 0; i < dim; ++i)
        m.col(i) = contract(Eigen::VectorXd::Unit(dim, i), omega).coeffs();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double smax = s.size() > 0 ? s(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > 1e-10 * smax) ++rank;
    return svd.matrixV().rightCols(dim - rank);
}

StandardForms standard_forms(int n, const Eigen::VectorXd& d) {
    if (n < 1) throw Error(ErrorKind::Config, "dimension n must be at least 1");
    if (d.size() != n) throw Error(ErrorKind::Config, "diffusion vector must have n entries");
    for (Eigen::Index j = 0; j < n; ++j)
        if (!(d(j) > 0.0)) throw Error(ErrorKind::Config, "diffusion coefficients must be positive");

    const int dim = 2 * n;
    // Product of 1-forms e*_{f(0)} ^ ... ^ e*_{f(n-1)} where f replaces slots by upper-half indices.
    auto product = [&](const std::vector<int>& factors) {
        KForm acc = basis_form(dim, factors[0]);
        for (std::size_t p = 1; p < factors.size(); ++p) acc = wedge(acc, basis_form(dim, factors[p]));
        return acc;
    };
    std::vector<int> base(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) base[static_cast<std::size_t>(j)] = j;

    StandardForms out{product(base), KForm(dim, n), KForm(dim, n)};
    for (int j = 0; j < n; ++j) {
        auto f = base;
        f[static_cast<std::size_t>(j)] = j + n;
        out.omega2 += (1.0 / d(j)) * product(f);
    }
    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
            auto f = base;
            f[static_cast<std::size_t>(j)] = j + n;
            f[static_cast<std::size_t>(k)] = k + n;
            out.omega3 += (2.0 / (d(j) * d(k))) * product(f);
        }
    }
    return out;
}

Eigen::VectorXd independent_contraction_vector(const KForm& omega, const KForm& eta) {
    if (omega.dim() != eta.dim() || omega.degree() != eta.degree())
        throw Error(ErrorKind::InvalidDegree, "forms must share dimension and degree");
    if (omega.degree() < 2)
        throw Error(ErrorKind::InvalidDegree, "contraction vector requires degree >= 2");
    const auto& a = omega.coeffs();
    const auto& b = eta.coeffs();
    if (!independent_pair(a, b))
        throw Error(ErrorKind::NoSuchVector, "forms are linearly dependent");

    const int dim = omega.dim();
    const int k = omega.degree();
    auto works = [&](const Eigen::VectorXd& v) {
        return independent_pair(contract(v, omega).coeffs(), contract(v, eta).coeffs());
    };

    // The constructive choice: locate the first coefficient pair (I, J) with
    // a_I b_J - a_J b_I != 0 and contract along a shared index, or along
    // e_i + e_j with i in I, j in J when the index sets are disjoint.
    auto constructive = [&]() -> std::optional<Eigen::VectorXd> {
        const auto& table = subsets(k, dim);
        const double tol = 1e-10 * a.cwiseAbs().maxCoeff() * b.cwiseAbs().maxCoeff();
        for (std::size_t i = 0; i < table.size(); ++i) {
            for (std::size_t j = i + 1; j < table.size(); ++j) {
                const auto ii = static_cast<Eigen::Index>(i);
                const auto jj = static_cast<Eigen::Index>(j);
                if (std::abs(a(ii) * b(jj) - a(jj) * b(ii)) <= tol) continue;
                const std::uint64_t shared = mask_of(table[i]) & mask_of(table[j]);
                Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
                if (shared) {
                    v(std::countr_zero(shared)) = 1.0;
                } else {
                    v(table[i].front()) = 1.0;
                    v(table[j].front()) = 1.0;
                }
                return v;
            }
        }
        return std::nullopt;
    };
    if (auto v = constructive(); v && works(*v)) return *v;

    // Other coefficients can spoil the constructive choice; search the
    // remaining candidates e_i and e_i +- e_j in a fixed order.
    for (int i = 0; i < dim; ++i) {
        Eigen::VectorXd v = Eigen::VectorXd::Unit(dim, i);
        if (works(v)) return v;
    }
    for (int i = 0; i < dim; ++i) {
        for (int j = i + 1; j < dim; ++j) {
            for (double s : {1.0, -1.0}) {
                Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
                v(i) = 1.0;
                v(j) = s;
                if (works(v)) return v;
            }
        }
    }
    throw Error(ErrorKind::NoSuchVector, "no vector with independent contractions was found");
}

Frame IndexOneLoop::frame_at(double t) const {
    const Eigen::Index dim = u1.size();
    Frame f(dim, static_cast<Eigen::Index>(v.size() + 1));
    f.col(0) = std::cos(std::numbers::pi * t) * u1 - std::sin(std::numbers::pi * t) * u2;
    for (std::size_t s = 0; s < v.size(); ++s) f.col(static_cast<Eigen::Index>(s + 1)) = v[s];
    return f;
}

IndexOneLoop index_one_loop(const KForm& omega1, const KForm& omega2, int samples) {
    if (omega1.dim() != omega2.dim() || omega1.degree() != omega2.degree())
        throw Error(ErrorKind::InvalidDegree, "forms must share dimension and degree");
    if (samples < 3) throw Error(ErrorKind::Config, "loop needs at least three samples");
    const int dim = omega1.dim();
    const int n = omega1.degree();
    if (!independent_pair(omega1.coeffs(), omega2.coeffs()))
        throw Error(ErrorKind::NoSuchVector, "forms are linearly dependent");

    IndexOneLoop loop;
    KForm f1 = omega1;
    KForm f2 = omega2;
    for (int s = 1; s < n; ++s) {
        Eigen::VectorXd v = independent_contraction_vector(f1, f2);
        f1 = contract(v, f1);
        f2 = contract(v, f2);
        loop.v.push_back(std::move(v));
    }

    // alpha_i(w) = omega_i(w, v_1, ..., v_{n-1}), sampled on the standard basis.
    Eigen::MatrixXd alpha(2, dim);
    Frame probe(dim, n);
    for (int s = 1; s < n; ++s) probe.col(s) = loop.v[static_cast<std::size_t>(s - 1)];
    for (int m = 0; m < dim; ++m) {
        probe.col(0) = Eigen::VectorXd::Unit(dim, m);
        alpha(0, m) = evaluate(omega1, probe);
        alpha(1, m) = evaluate(omega2, probe);
    }
    const Eigen::Matrix2d gram = alpha * alpha.transpose();
    if (std::abs(gram.determinant()) <= 1e-20 * gram.squaredNorm())
        throw Error(ErrorKind::NoSuchVector, "reduced 1-forms are dependent");
    const Eigen::MatrixXd right_inverse = alpha.transpose() * gram.inverse();
    loop.u1 = right_inverse.col(0);
    loop.u2 = right_inverse.col(1);

    loop.t.resize(static_cast<std::size_t>(samples));
    loop.frames.reserve(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / (samples - 1);
        loop.t[static_cast<std::size_t>(i)] = t;
        loop.frames.push_back(loop.frame_at(t));
    }
    return loop;
}

double pfaffian4(const Eigen::Matrix4d& a) {
    return a(0, 1) * a(2, 3) - a(0, 2) * a(1, 3) + a(0, 3) * a(1, 2);
}

Eigen::MatrixXd to_skew(const KForm& omega) {
    if (omega.degree() != 2) throw Error(ErrorKind::InvalidDegree, "to_skew expects a 2-form");
    const int dim = omega.dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    const auto& table = subsets(2, dim);
    for (std::size_t r = 0; r < table.size(); ++r) {
        const double w = omega.coeffs()(static_cast<Eigen::Index>(r));
        m(table[r][0], table[r][1]) = w;
        m(table[r][1], table[r][0]) = -w;
    }
    return m;
}

KForm from_skew(const Eigen::MatrixXd& m) {
    const int dim = static_cast<int>(m.rows());
    KForm out(dim, 2);
    const auto& table = subsets(2, dim);
    for (std::size_t r = 0; r < table.size(); ++r)
        out.coeffs()(static_cast<Eigen::Index>(r)) = m(table[r][0], table[r][1]);
    return out;
}

PencilClassification pfaffian_classify(const Eigen::Matrix4d& w1, const Eigen::Matrix4d& w2) {
    const double scale = std::max(w1.cwiseAbs().maxCoeff(), w2.cwiseAbs().maxCoeff());
    if ((w1 + w1.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale ||
        (w2 + w2.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw Error(ErrorKind::Config, "pencil matrices must be skew-symmetric");
    const Eigen::VectorXd v1 = Eigen::Map<const Eigen::VectorXd>(w1.data(), 16);
    const Eigen::VectorXd v2 = Eigen::Map<const Eigen::VectorXd>(w2.data(), 16);
    if (!independent_pair(v1, v2))
        throw Error(ErrorKind::Config, "pencil matrices are linearly dependent");

    PencilClassification out{PencilType::IdenticallyZero};
    out.a = pfaffian4(w1);
    out.c = pfaffian4(w2);
    out.b = pfaffian4(w1 + w2) - out.a - out.c;
    const double coeff_scale = std::max({std::abs(out.a), std::abs(out.b), std::abs(out.c)});
    if (coeff_scale <= 1e-12 * scale * scale) return out;
    const double disc = out.b * out.b - 4.0 * out.a * out.c;
    if (std::abs(disc) <= 1e-10 * coeff_scale * coeff_scale)
        out.type = PencilType::DoubleRoot;
    else
        out.type = disc > 0.0 ? PencilType::TwoRealRoots : PencilType::NoRealRoots;
    return out;
}

const char* to_string(PencilType type) noexcept {
    switch (type) {
    case PencilType::IdenticallyZero: return "identically-zero";
    case PencilType::TwoRealRoots: return "two-real-roots";
    case PencilType::DoubleRoot: return "double-root";
    case PencilType::NoRealRoots: return "no-real-roots";
    }
    return "unknown";
}

} // namespace maslov

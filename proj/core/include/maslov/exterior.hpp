#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace maslov {

/// A 2n x n real matrix whose columns span an oriented n-plane in R^{2n}.
using Frame = Eigen::MatrixXd;

/// Binomial coefficient C(n, k); zero when k < 0 or k > n.
std::size_t binomial(int n, int k);

/// Strictly increasing list of basis indices together with its position in
/// the lexicographic enumeration of all k-subsets of {0, ..., dim-1}.
///
/// Indices are zero based throughout the library: the standard basis of
/// R^{2n} is e_0, ..., e_{2n-1}.
struct MultiIndex {
    std::vector<int> indices;
    std::size_t rank = 0;
};

/// Lexicographic rank of a strictly increasing subset of {0, ..., dim-1}.
std::size_t subset_rank(std::span<const int> indices, int dim);

/// Inverse of subset_rank. Tables are cached per (dim, k) and shared
/// between threads.
const std::vector<int>& subset_at(std::size_t rank, int k, int dim);

/// Number of k-subsets, i.e. the length of a degree-k coefficient vector.
inline std::size_t subset_count(int k, int dim) { return binomial(dim, k); }

/// Element of the k-th exterior power of R^dim (or of its dual), stored as
/// one coefficient per lexicographically ranked k-subset. The Tag only
/// distinguishes k-vectors from k-forms at the type level.
template <class Tag>
class Graded {
public:
    Graded() = default;

    /// Zero element of degree k over R^dim.
    Graded(int dim, int degree);

    /// Element with the given coefficient vector (length C(dim, degree)).
    Graded(int dim, int degree, Eigen::VectorXd coeffs);

    /// Basis element e_{i_1} ^ ... ^ e_{i_k} for a strictly increasing list.
    static Graded basis(int dim, std::span<const int> indices);

    int dim() const noexcept { return dim_; }
    int degree() const noexcept { return degree_; }
    const Eigen::VectorXd& coeffs() const noexcept { return coeffs_; }
    Eigen::VectorXd& coeffs() noexcept { return coeffs_; }

    /// Coefficient at a strictly increasing index list.
    double at(std::span<const int> indices) const;
    double at(std::initializer_list<int> indices) const;

    Graded& operator+=(const Graded& other);
    Graded& operator-=(const Graded& other);
    Graded& operator*=(double s);

    friend Graded operator+(Graded a, const Graded& b) { return a += b; }
    friend Graded operator-(Graded a, const Graded& b) { return a -= b; }
    friend Graded operator*(double s, Graded a) { return a *= s; }
    friend Graded operator*(Graded a, double s) { return a *= s; }

private:
    int dim_ = 0;
    int degree_ = 0;
    Eigen::VectorXd coeffs_;
};

struct VectorTag {};
struct FormTag {};

/// Element of the k-th exterior power of R^{2n}.
using KVector = Graded<VectorTag>;
/// Element of the k-th exterior power of the dual space, in the basis e*_I.
using KForm = Graded<FormTag>;

extern template class Graded<VectorTag>;
extern template class Graded<FormTag>;

/// Exterior product with shuffle signs. Throws ErrorKind::InvalidDegree when
/// the degrees sum past dim or the ambient dimensions differ.
template <class Tag>
Graded<Tag> wedge(const Graded<Tag>& a, const Graded<Tag>& b);

extern template KVector wedge(const KVector&, const KVector&);
extern template KForm wedge(const KForm&, const KForm&);

/// Basis 1-form e*_i over R^dim.
KForm basis_form(int dim, int i);

/// Interior product: (i_v w)(w_1, ..., w_{k-1}) = w(v, w_1, ..., w_{k-1}).
/// Throws ErrorKind::InvalidDegree for degree-0 forms.
KForm contract(const Eigen::VectorXd& v, const KForm& omega);

/// Plucker coordinates of a frame: the coefficient at I is the n x n minor
/// on rows I. Rank-deficient frames give the zero vector.
KVector plucker(const Frame& frame);

/// Dual pairing between a k-form and a k-vector.
double pairing(const KForm& omega, const KVector& xi);

/// omega(f_1, ..., f_n) for the columns of the frame, computed as the dual
/// pairing of omega with plucker(frame).
double evaluate(const KForm& omega, const Frame& frame);

/// evaluate(omega, frame) / sqrt(det(frame^T frame)): the value of omega on
/// the oriented plane, independent of the (positively oriented) basis.
/// Throws ErrorKind::DegenerateFrame for rank-deficient frames.
double psi(const KForm& omega, const Frame& frame);

/// Basis (as matrix columns) of {v : i_v omega = 0}. Empty matrix when the
/// form is non-degenerate.
Eigen::MatrixXd kernel(const KForm& omega);

/// The three forms used to build the hyperplane index for a diffusion
/// matrix D = diag(d): omega1 marks the Dirichlet train, omega2 carries the
/// 1/d_j weights and omega3 the 2/(d_j d_k) weights.
struct StandardForms {
    KForm omega1;
    KForm omega2;
    KForm omega3;
};

/// Throws ErrorKind::Config when some d_j <= 0 or n < 1.
StandardForms standard_forms(int n, const Eigen::VectorXd& d);

/// A vector v for which i_v omega and i_v eta are linearly independent,
/// following the constructive argument: e_i when the first non-vanishing
/// 2x2 coefficient minor shares the index i, otherwise e_i + e_j.
/// Throws ErrorKind::NoSuchVector for dependent inputs.
Eigen::VectorXd independent_contraction_vector(const KForm& omega, const KForm& eta);

/// Sampled loop of planes whose image under [omega1 : omega2] winds once
/// around RP^1.
struct IndexOneLoop {
    std::vector<Eigen::VectorXd> v;   ///< v_1, ..., v_{n-1}
    Eigen::VectorXd u1;               ///< omega_i(u_j, v_1, ...) = delta_ij
    Eigen::VectorXd u2;
    std::vector<double> t;            ///< sample parameters in [0, 1]
    std::vector<Frame> frames;        ///< spans of the loop at each sample

    /// Frame at an arbitrary parameter t.
    Frame frame_at(double t) const;
};

/// Builds the loop t -> span{cos(pi t) u1 - sin(pi t) u2, v_1, ..., v_{n-1}}
/// sampled at `samples` points of [0, 1].
IndexOneLoop index_one_loop(const KForm& omega1, const KForm& omega2, int samples = 257);

/// Real-root structure of the binary quadratic q(x,y) = Pf(x W1 + y W2).
enum class PencilType { IdenticallyZero, TwoRealRoots, DoubleRoot, NoRealRoots };

struct PencilClassification {
    PencilType type;
    double a = 0.0;  ///< coefficient of x^2
    double b = 0.0;  ///< coefficient of x y
    double c = 0.0;  ///< coefficient of y^2
};

/// Pfaffian of a 4x4 skew-symmetric matrix.
double pfaffian4(const Eigen::Matrix4d& a);

/// Skew-symmetric matrix of a 2-form (W_ij = coefficient at {i,j}, i<j).
Eigen::MatrixXd to_skew(const KForm& omega);

/// 2-form with coefficients read from the upper triangle of a skew matrix.
KForm from_skew(const Eigen::MatrixXd& m);

/// Classifies the pencil spanned by two skew 4x4 matrices. Throws
/// ErrorKind::Config for non-skew input or a dependent pair.
PencilClassification pfaffian_classify(const Eigen::Matrix4d& w1, const Eigen::Matrix4d& w2);

const char* to_string(PencilType type) noexcept;

} // namespace maslov

#pragma once

// Dense Liouville-space algebra.
//
// Vectorization is row-major throughout: Liouville index a = i*D + j holds
// matrix element (i, j). Under that convention vec(A X B) = (A kron B^T) vec(X),
// and every Kronecker form in this library follows from it.

#include <complex>
#include <cstddef>
#include <optional>

#include <Eigen/Dense>

namespace ttm {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using LiouvilleVector = Eigen::VectorXcd;

inline constexpr double kStructuralTol = 1e-10;
inline constexpr double kHermitianTol = 1e-12;

/// Physical state: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
public:
    /// Validates and wraps `m`; throws ValidationError on an unphysical input.
    explicit DensityMatrix(Matrix m);

    Eigen::Index dim() const noexcept { return m_.rows(); }
    const Matrix& matrix() const noexcept { return m_; }
    Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

    static DensityMatrix pure(const Eigen::VectorXcd& psi);
    static DensityMatrix maximally_mixed(Eigen::Index dim);

private:
    Matrix m_;
};

/// Canonical Liouville basis element |row><col|; carries no physicality invariant.
struct BasisElement {
    Eigen::Index dim = 2;
    Eigen::Index row = 0;
    Eigen::Index col = 0;

    Matrix matrix() const;
    Eigen::Index liouville_index() const noexcept { return row * dim + col; }
};

enum class SuperOpKind { map, tensor, kernel, liouvillian };

const char* to_string(SuperOpKind kind) noexcept;

/// D^2 x D^2 complex matrix acting on row-major vectorized operators.
class SuperOperator {
public:
    SuperOperator() = default;
    SuperOperator(Matrix m, SuperOpKind kind);

    static SuperOperator identity(Eigen::Index hilbert_dim, SuperOpKind kind = SuperOpKind::map);
    static SuperOperator zero(Eigen::Index hilbert_dim, SuperOpKind kind);

    Eigen::Index hilbert_dim() const noexcept { return hilbert_dim_; }
    Eigen::Index liouville_dim() const noexcept { return m_.rows(); }
    const Matrix& matrix() const noexcept { return m_; }
    SuperOpKind kind() const noexcept { return kind_; }

    /// Same entries, different role tag.
    SuperOperator as(SuperOpKind kind) const { return SuperOperator(m_, kind); }

    LiouvilleVector apply(const LiouvilleVector& v) const { return m_ * v; }
    Matrix apply(const Matrix& rho) const;

    /// Entry that maps element (from.first, from.second) into (to.first, to.second).
    Complex element(std::pair<Eigen::Index, Eigen::Index> from,
                    std::pair<Eigen::Index, Eigen::Index> to) const;

private:
    Matrix m_;
    SuperOpKind kind_ = SuperOpKind::map;
    Eigen::Index hilbert_dim_ = 0;
};

LiouvilleVector vectorize(const Matrix& m);
LiouvilleVector vectorize(const DensityMatrix& rho);
LiouvilleVector vectorize(const BasisElement& e);

/// Inverse of vectorize; no physicality check. Throws DimensionError if size is not a square.
Matrix devectorize(const LiouvilleVector& v);

/// Hilbert dimension D of a Liouville dimension D^2, or DimensionError.
Eigen::Index hilbert_dim_of(Eigen::Index liouville_dim);

bool is_hermitian(const Matrix& m, double tol = kStructuralTol);

/// S vec(rho) = vec(H rho - rho H) = (H kron I - I kron H^T) vec(rho).
SuperOperator liouvillian_superop(const Matrix& h);

/// Commutator superoperator without the Hermiticity precondition.
Matrix commutator_superop(const Matrix& a);

/// S vec(rho) = vec(U rho U^dagger) = (U kron conj(U)) vec(rho).
SuperOperator unitary_superop(const Matrix& u);

/// Spectral norm (largest singular value).
double superop_norm(const SuperOperator& s);
double superop_norm(const Matrix& s);

/// Unit Bloch axis b/|b| of M = a I + b.sigma, first nonzero component positive.
/// std::nullopt when |b| < 1e-12.
std::optional<Eigen::Vector3d> bloch_axis(const Matrix& m);

/// exp(-i H t) for Hermitian H by eigendecomposition.
Matrix unitary_propagator(const Matrix& h, double t);

namespace pauli {
Matrix identity();
Matrix x();
Matrix y();
Matrix z();
/// sigma_minus = |0><1| (lowers |1> to |0>).
Matrix minus();
}  // namespace pauli

}  // namespace ttm

#include "ttm/liouville.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "ttm/errors.hpp"

namespace ttm {

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

}  // namespace

DensityMatrix::DensityMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1) {
        throw DimensionError("density matrix must be square and nonempty");
    }
    if (!is_hermitian(m_, kHermitianTol)) {
        throw ValidationError("density matrix is not Hermitian");
    }
    if (std::abs(m_.trace() - Complex(1.0, 0.0)) > kStructuralTol) {
        throw ValidationError("density matrix trace differs from 1");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kStructuralTol) {
        throw ValidationError("density matrix has a negative eigenvalue");
    }
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
    const Eigen::VectorXcd n = psi / psi.norm();
    return DensityMatrix(n * n.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
    return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

Matrix BasisElement::matrix() const {
    if (row < 0 || col < 0 || row >= dim || col >= dim) {
        throw RangeError("basis element index outside dimension");
    }
    Matrix m = Matrix::Zero(dim, dim);
    m(row, col) = 1.0;
    return m;
}

const char* to_string(SuperOpKind kind) noexcept {
    switch (kind) {
        case SuperOpKind::map: return "map";
        case SuperOpKind::tensor: return "tensor";
        case SuperOpKind::kernel: return "kernel";
        case SuperOpKind::liouvillian: return "liouvillian";
    }
    return "unknown";
}

SuperOperator::SuperOperator(Matrix m, SuperOpKind kind) : m_(std::move(m)), kind_(kind) {
    if (m_.rows() != m_.cols()) {
        throw DimensionError("superoperator must be square");
    }
    hilbert_dim_ = hilbert_dim_of(m_.rows());
}

SuperOperator SuperOperator::identity(Eigen::Index hilbert_dim, SuperOpKind kind) {
    const Eigen::Index n = hilbert_dim * hilbert_dim;
    return SuperOperator(Matrix::Identity(n, n), kind);
}

SuperOperator SuperOperator::zero(Eigen::Index hilbert_dim, SuperOpKind kind) {
    const Eigen::Index n = hilbert_dim * hilbert_dim;
    return SuperOperator(Matrix::Zero(n, n), kind);
}

Matrix SuperOperator::apply(const Matrix& rho) const {
    if (rho.rows() != hilbert_dim_ || rho.cols() != hilbert_dim_) {
        throw DimensionError("operator dimension does not match superoperator");
    }
    return devectorize(m_ * vectorize(rho));
}

Complex SuperOperator::element(std::pair<Eigen::Index, Eigen::Index> from,
                               std::pair<Eigen::Index, Eigen::Index> to) const {
    const auto d = hilbert_dim_;
    auto in_range = [d](auto p) { return p.first >= 0 && p.second >= 0 && p.first < d && p.second < d; };
    if (!in_range(from) || !in_range(to)) {
        throw RangeError("superoperator element label outside dimension");
    }
    return m_(to.first * d + to.second, from.first * d + from.second);
}

LiouvilleVector vectorize(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw DimensionError("only square operators can be vectorized");
    }
    const Eigen::Index d = m.rows();
    LiouvilleVector v(d * d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            v(i * d + j) = m(i, j);
        }
    }
    return v;
}

LiouvilleVector vectorize(const DensityMatrix& rho) { return vectorize(rho.matrix()); }

LiouvilleVector vectorize(const BasisElement& e) { return vectorize(e.matrix()); }

Eigen::Index hilbert_dim_of(Eigen::Index liouville_dim) {
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(liouville_dim))));
    if (d * d != liouville_dim) {
        throw DimensionError("Liouville dimension " + std::to_string(liouville_dim) + " is not a perfect square");
    }
    return d;
}

Matrix devectorize(const LiouvilleVector& v) {
    const Eigen::Index d = hilbert_dim_of(v.size());
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            m(i, j) = v(i * d + j);
        }
    }
    return m;
}

bool is_hermitian(const Matrix& m, double tol) {
    return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Matrix commutator_superop(const Matrix& a) {
    const Eigen::Index d = a.rows();
    const Matrix id = Matrix::Identity(d, d);
    return kron(a, id) - kron(id, a.transpose());
}

SuperOperator liouvillian_superop(const Matrix& h) {
    if (!is_hermitian(h, kStructuralTol)) {
        throw ValidationError("Liouvillian requires a Hermitian Hamiltonian");
    }
    return SuperOperator(commutator_superop(h), SuperOpKind::liouvillian);
}

SuperOperator unitary_superop(const Matrix& u) {
    if (u.rows() != u.cols()) {
        throw DimensionError("unitary must be square");
    }
    const Matrix id = Matrix::Identity(u.rows(), u.cols());
    if ((u.adjoint() * u - id).cwiseAbs().maxCoeff() > kStructuralTol) {
        throw ValidationError("matrix is not unitary");
    }
    return SuperOperator(kron(u, u.conjugate()), SuperOpKind::map);
}

double superop_norm(const Matrix& s) {
    if (s.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Matrix> svd(s);
    return svd.singularValues()(0);
}

double superop_norm(const SuperOperator& s) { return superop_norm(s.matrix()); }

std::optional<Eigen::Vector3d> bloch_axis(const Matrix& m) {
    if (m.rows() != 2 || m.cols() != 2) {
        throw DimensionError("Bloch axis is defined for 2x2 operators only");
    }
    // M = a I + bx X + by Y + bz Z  =>  b = (Re(M01+M10), Im(M10-M01), M00-M11) / 2
    Eigen::Vector3d b((m(0, 1) + m(1, 0)).real() / 2.0, (m(1, 0) - m(0, 1)).imag() / 2.0,
                      (m(0, 0) - m(1, 1)).real() / 2.0);
    const double n = b.norm();
    if (n < 1e-12) {
        return std::nullopt;
    }
    b /= n;
    for (int k = 0; k < 3; ++k) {
        if (std::abs(b(k)) > 1e-12) {
            if (b(k) < 0.0) {
                b = -b;
            }
            break;
        }
    }
    return b;
}

Matrix unitary_propagator(const Matrix& h, double t) {
    if (!is_hermitian(h, kStructuralTol)) {
        throw ValidationError("propagator requires a Hermitian Hamiltonian");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const Eigen::VectorXcd phases =
        (es.eigenvalues().cast<Complex>() * Complex(0.0, -t)).array().exp().matrix();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

namespace pauli {
Matrix identity() { return Matrix::Identity(2, 2); }
Matrix x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}
Matrix y() {
    Matrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}
Matrix z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}
Matrix minus() {
    Matrix m(2, 2);
    m << 0, 1, 0, 0;
    return m;
}
}  // namespace pauli

}  // namespace ttm

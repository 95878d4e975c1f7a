#include "ttm/nz_kernel.hpp"

#include <Eigen/QR>

#include "ttm/errors.hpp"

namespace ttm {

const SuperOperator& KernelSequence::kernel(std::size_t s) const {
    if (s < 1 || s > kernels.size()) {
        throw RangeError("kernel index outside 1..N");
    }
    return kernels[s - 1];
}

namespace {

// Real basis of D x D Hermitian matrices: E_jj, E_jk + E_kj, i(E_jk - E_kj).
std::vector<Matrix> hermitian_basis(Eigen::Index d) {
    std::vector<Matrix> basis;
    for (Eigen::Index j = 0; j < d; ++j) {
        Matrix m = Matrix::Zero(d, d);
        m(j, j) = 1.0;
        basis.push_back(m);
    }
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index k = j + 1; k < d; ++k) {
            Matrix s = Matrix::Zero(d, d);
            s(j, k) = 1.0;
            s(k, j) = 1.0;
            basis.push_back(s);
            Matrix a = Matrix::Zero(d, d);
            a(j, k) = Complex(0.0, 1.0);
            a(k, j) = Complex(0.0, -1.0);
            basis.push_back(a);
        }
    }
    return basis;
}

}  // namespace

LiouvillianEstimate extract_liouvillian(const SuperOperator& t1, double dt, const std::optional<Matrix>& known_h) {
    if (!(dt > 0.0)) {
        throw ValidationError("time step must be positive");
    }
    const Eigen::Index d = t1.hilbert_dim();
    const Eigen::Index n = t1.liouville_dim();
    LiouvillianEstimate est;
    est.raw = SuperOperator(Complex(0.0, 1.0) * (t1.matrix() - Matrix::Identity(n, n)) / dt, SuperOpKind::liouvillian);

    if (known_h) {
        if (known_h->rows() != d || known_h->cols() != d) {
            throw DimensionError("known Hamiltonian dimension differs from tensors");
        }
        est.liouvillian = liouvillian_superop(*known_h);
        est.hamiltonian = *known_h;
        est.from_known_h = true;
    } else {
        const auto basis = hermitian_basis(d);
        const auto p = static_cast<Eigen::Index>(basis.size());
        const Eigen::Index rows = n * n;
        Eigen::MatrixXd a(2 * rows, p);
        for (Eigen::Index c = 0; c < p; ++c) {
            const Matrix l = commutator_superop(basis[static_cast<std::size_t>(c)]);
            const Eigen::Map<const Eigen::VectorXcd> flat(l.data(), rows);
            a.col(c).head(rows) = flat.real();
            a.col(c).tail(rows) = flat.imag();
        }
        const Eigen::Map<const Eigen::VectorXcd> raw_flat(est.raw.matrix().data(), rows);
        Eigen::VectorXd b(2 * rows);
        b.head(rows) = raw_flat.real();
        b.tail(rows) = raw_flat.imag();
        // The identity direction is in the null space; the minimum-norm solution drops it.
        const Eigen::VectorXd x = a.completeOrthogonalDecomposition().solve(b);
        Matrix h = Matrix::Zero(d, d);
        for (Eigen::Index c = 0; c < p; ++c) {
            h += x(c) * basis[static_cast<std::size_t>(c)];
        }
        h -= (h.trace() / static_cast<double>(d)) * Matrix::Identity(d, d);
        h = 0.5 * (h + h.adjoint());
        est.hamiltonian = h;
        est.liouvillian = liouvillian_superop(h);
    }
    est.remainder = SuperOperator(est.raw.matrix() - est.liouvillian.matrix(), SuperOpKind::kernel);
    est.remainder_norm = superop_norm(est.remainder);
    return est;
}

KernelSequence extract_kernel(const TransferTensorSequence& tensors, const SuperOperator& liouvillian) {
    if (tensors.size() == 0) {
        throw ValidationError("no transfer tensors to convert");
    }
    if (liouvillian.liouville_dim() != tensors.tensor(1).liouville_dim()) {
        throw DimensionError("Liouvillian dimension differs from tensors");
    }
    const double dt = tensors.dt();
    const double dt2 = dt * dt;
    const Eigen::Index n = liouvillian.liouville_dim();
    KernelSequence k;
    k.dt = dt;
    k.liouvillian = liouvillian.as(SuperOpKind::liouvillian);
    k.kernels.reserve(tensors.size());
    k.kernels.emplace_back(
        (tensors.tensor(1).matrix() - Matrix::Identity(n, n) + Complex(0.0, dt) * liouvillian.matrix()) / dt2,
        SuperOpKind::kernel);
    for (std::size_t s = 2; s <= tensors.size(); ++s) {
        k.kernels.emplace_back(tensors.tensor(s).matrix() / dt2, SuperOpKind::kernel);
    }
    return k;
}

TransferTensorSequence kernel_to_tensors(const KernelSequence& kernel) {
    if (kernel.kernels.empty()) {
        throw ValidationError("kernel sequence is empty");
    }
    const double dt = kernel.dt;
    const double dt2 = dt * dt;
    const Eigen::Index n = kernel.liouvillian.liouville_dim();
    std::vector<SuperOperator> tensors;
    tensors.reserve(kernel.kernels.size());
    tensors.emplace_back(Matrix::Identity(n, n) - Complex(0.0, dt) * kernel.liouvillian.matrix() +
                             kernel.kernels.front().matrix() * dt2,
                         SuperOpKind::tensor);
    for (std::size_t s = 1; s < kernel.kernels.size(); ++s) {
        tensors.emplace_back(kernel.kernels[s].matrix() * dt2, SuperOpKind::tensor);
    }
    return TransferTensorSequence(dt, std::move(tensors), true);
}

std::vector<ElementLabel> all_element_labels(Eigen::Index dim) {
    std::vector<ElementLabel> labels;
    for (Eigen::Index a = 0; a < dim * dim; ++a) {
        for (Eigen::Index b = 0; b < dim * dim; ++b) {
            labels.push_back({{a / dim, a % dim}, {b / dim, b % dim}});
        }
    }
    return labels;
}

KernelTable kernel_report(const KernelSequence& kernel, const std::vector<ElementLabel>& labels) {
    const Eigen::Index d = kernel.dim();
    for (const auto& l : labels) {
        auto bad = [d](auto p) { return p.first < 0 || p.second < 0 || p.first >= d || p.second >= d; };
        if (bad(l.from) || bad(l.to)) {
            throw RangeError("kernel element label outside dimension");
        }
    }
    KernelTable table;
    table.dt = kernel.dt;
    table.labels = labels;
    table.values.resize(static_cast<Eigen::Index>(kernel.kernels.size()), static_cast<Eigen::Index>(labels.size()));
    for (std::size_t s = 0; s < kernel.kernels.size(); ++s) {
        for (std::size_t c = 0; c < labels.size(); ++c) {
            table.values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(c)) =
                kernel.kernels[s].element(labels[c].from, labels[c].to);
        }
    }
    return table;
}

}  // namespace ttm

#include "ttm/kernels.hpp"

#include <algorithm>

#include "ttm/errors.hpp"

namespace ttm::kernels {

Matrix CsrMatrix::to_dense() const {
    Matrix d = Matrix::Zero(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (auto p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
            d(r, col_idx[p]) += values[p];
        }
    }
    return d;
}

void CsrBuilder::add(Eigen::Index col, Complex value) {
    if (value != Complex(0.0, 0.0)) {
        pending_.emplace_back(col, value);
    }
}

void CsrBuilder::finish_row() {
    std::sort(pending_.begin(), pending_.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < pending_.size();) {
        auto col = pending_[i].first;
        Complex sum = 0.0;
        while (i < pending_.size() && pending_[i].first == col) {
            sum += pending_[i].second;
            ++i;
        }
        m_.col_idx.push_back(static_cast<std::int32_t>(col));
        m_.values.push_back(sum);
    }
    pending_.clear();
    m_.row_ptr.push_back(static_cast<std::int64_t>(m_.values.size()));
    ++m_.rows;
}

CsrMatrix CsrBuilder::build() && { return std::move(m_); }

namespace {

void check_spmm(const CsrMatrix& a, const Matrix& x, Matrix& y) {
    if (x.rows() != a.cols) {
        throw DimensionError("spmm: operand rows do not match matrix columns");
    }
    if (y.rows() != a.rows || y.cols() != x.cols()) {
        y.resize(a.rows, x.cols());
    }
}

inline void spmm_row(const CsrMatrix& a, const Matrix& x, Matrix& y, Eigen::Index r) {
    const Eigen::Index k = x.cols();
    for (Eigen::Index c = 0; c < k; ++c) {
        Complex acc = 0.0;
        for (auto p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
            acc += a.values[p] * x(a.col_idx[p], c);
        }
        y(r, c) = acc;
    }
}

}  // namespace

void spmm_serial(const CsrMatrix& a, const Matrix& x, Matrix& y) {
    check_spmm(a, x, y);
    for (Eigen::Index r = 0; r < a.rows; ++r) {
        spmm_row(a, x, y, r);
    }
}

void spmm_parallel(const CsrMatrix& a, const Matrix& x, Matrix& y) {
    check_spmm(a, x, y);
    const Eigen::Index rows = a.rows;
#pragma omp parallel for schedule(static)
    for (Eigen::Index r = 0; r < rows; ++r) {
        spmm_row(a, x, y, r);
    }
}

void spmm(const CsrMatrix& a, const Matrix& x, Matrix& y, Exec exec) {
    exec == Exec::parallel ? spmm_parallel(a, x, y) : spmm_serial(a, x, y);
}

void axpy(const Matrix& x, Complex h, const Matrix& k, Matrix& out, Exec exec) {
    if (out.rows() != x.rows() || out.cols() != x.cols()) {
        out.resize(x.rows(), x.cols());
    }
    const Eigen::Index n = x.size();
    const Complex* xp = x.data();
    const Complex* kp = k.data();
    Complex* op = out.data();
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (Eigen::Index i = 0; i < n; ++i) {
            op[i] = xp[i] + h * kp[i];
        }
    } else {
        for (Eigen::Index i = 0; i < n; ++i) {
            op[i] = xp[i] + h * kp[i];
        }
    }
}

namespace {

void check_step(std::span<const Matrix> tensors, const Matrix& ring, Eigen::Index count) {
    if (count < 0 || count > static_cast<Eigen::Index>(tensors.size()) || count > ring.cols()) {
        throw RangeError("ttm_step: history count exceeds available tensors or buffer");
    }
}

inline Complex step_row(std::span<const Matrix> tensors, const Matrix& ring, Eigen::Index head,
                        Eigen::Index count, Eigen::Index r) {
    const Eigen::Index k = ring.cols();
    const Eigen::Index n = ring.rows();
    Complex acc = 0.0;
    for (Eigen::Index s = 0; s < count; ++s) {
        const Matrix& t = tensors[static_cast<std::size_t>(s)];
        const Eigen::Index col = (head + s) % k;
        for (Eigen::Index c = 0; c < n; ++c) {
            acc += t(r, c) * ring(c, col);
        }
    }
    return acc;
}

}  // namespace

void ttm_step_serial(std::span<const Matrix> tensors, const Matrix& ring, Eigen::Index head,
                     Eigen::Index count, LiouvilleVector& out) {
    check_step(tensors, ring, count);
    out.resize(ring.rows());
    for (Eigen::Index r = 0; r < ring.rows(); ++r) {
        out(r) = step_row(tensors, ring, head, count, r);
    }
}

void ttm_step_parallel(std::span<const Matrix> tensors, const Matrix& ring, Eigen::Index head,
                       Eigen::Index count, LiouvilleVector& out) {
    check_step(tensors, ring, count);
    out.resize(ring.rows());
    const Eigen::Index rows = ring.rows();
#pragma omp parallel for schedule(static)
    for (Eigen::Index r = 0; r < rows; ++r) {
        out(r) = step_row(tensors, ring, head, count, r);
    }
}

void ttm_step(std::span<const Matrix> tensors, const Matrix& ring, Eigen::Index head, Eigen::Index count,
              LiouvilleVector& out, Exec exec) {
    exec == Exec::parallel ? ttm_step_parallel(tensors, ring, head, count, out)
                           : ttm_step_serial(tensors, ring, head, count, out);
}

}  // namespace ttm::kernels

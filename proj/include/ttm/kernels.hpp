#pragma once

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP version with identical semantics; tests compare the two and
// bench/bench_kernels.cpp times them.

#include <cstdint>
#include <span>
#include <vector>

#include "ttm/liouville.hpp"

namespace ttm::kernels {

enum class Exec { serial, parallel };

/// Compressed sparse row complex matrix.
struct CsrMatrix {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    std::vector<std::int64_t> row_ptr{0};
    std::vector<std::int32_t> col_idx;
    std::vector<Complex> values;

    std::size_t nnz() const noexcept { return values.size(); }
    Matrix to_dense() const;
};

/// Row-by-row builder; rows must be appended in order.
class CsrBuilder {
public:
    explicit CsrBuilder(Eigen::Index cols) { m_.cols = cols; }
    void add(Eigen::Index col, Complex value);
    void finish_row();
    CsrMatrix build() &&;

private:
    CsrMatrix m_;
    std::vector<std::pair<Eigen::Index, Complex>> pending_;
};

/// y = A x for a block of right-hand sides (x: A.cols x k, y resized to A.rows x k).
void spmm_serial(const CsrMatrix& a, const Matrix& x, Matrix& y);
void spmm_parallel(const CsrMatrix& a, const Matrix& x, Matrix& y);
void spmm(const CsrMatrix& a, const Matrix& x, Matrix& y, Exec exec);

/// out = x + h * k, elementwise.
void axpy(const Matrix& x, Complex h, const Matrix& k, Matrix& out, Exec exec);

/// One transfer-tensor step: out = sum_{s=1}^{count} T_s * history(s), where
/// history(s) is column (head + s - 1) mod K of the ring buffer `ring`.
void ttm_step_serial(std::span<const Matrix> tensors, const Matrix& ring, Eigen::Index head,
                     Eigen::Index count, LiouvilleVector& out);
void ttm_step_parallel(std::span<const Matrix> tensors, const Matrix& ring, Eigen::Index head,
                       Eigen::Index count, LiouvilleVector& out);
void ttm_step(std::span<const Matrix> tensors, const Matrix& ring, Eigen::Index head, Eigen::Index count,
              LiouvilleVector& out, Exec exec);

}  // namespace ttm::kernels

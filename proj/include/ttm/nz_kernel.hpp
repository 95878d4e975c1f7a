#pragma once

// Discrete Nakajima-Zwanzig identification of transfer tensors:
//   T_1 = I - i L dt + K_1 dt^2,    T_s = K_s dt^2  (s >= 2)
// The kernel carries units of energy^2.

#include <optional>
#include <utility>
#include <vector>

#include "ttm/transfer_tensor.hpp"

namespace ttm {

struct KernelSequence {
    double dt = 0.0;
    SuperOperator liouvillian;
    /// K_1..K_N.
    std::vector<SuperOperator> kernels;

    Eigen::Index dim() const noexcept { return liouvillian.hilbert_dim(); }
    const SuperOperator& kernel(std::size_t s) const;
};

struct LiouvillianEstimate {
    SuperOperator liouvillian;
    /// Traceless Hermitian H with liouvillian = [H, .]; the known H when supplied.
    Matrix hamiltonian;
    /// i (T_1 - I) / dt before projection.
    SuperOperator raw;
    /// raw - liouvillian: the O(dt) kernel contamination and any dissipative part.
    SuperOperator remainder;
    double remainder_norm = 0.0;
    bool from_known_h = false;
};

/// Liouvillian from T_1. With `known_h` this is liouvillian_superop(*known_h);
/// otherwise i (T_1 - I)/dt is projected by least squares onto commutator form.
LiouvillianEstimate extract_liouvillian(const SuperOperator& t1, double dt,
                                        const std::optional<Matrix>& known_h = std::nullopt);

KernelSequence extract_kernel(const TransferTensorSequence& tensors, const SuperOperator& liouvillian);

TransferTensorSequence kernel_to_tensors(const KernelSequence& kernel);

/// Superoperator element label: element `from` of the input maps into element `to`.
struct ElementLabel {
    std::pair<Eigen::Index, Eigen::Index> from;
    std::pair<Eigen::Index, Eigen::Index> to;
};

/// All D^4 labels in Liouville order (from-major).
std::vector<ElementLabel> all_element_labels(Eigen::Index dim);

struct KernelTable {
    double dt = 0.0;
    std::vector<ElementLabel> labels;
    /// values(s - 1, c) = K_s[label c].
    Eigen::MatrixXcd values;
};

KernelTable kernel_report(const KernelSequence& kernel, const std::vector<ElementLabel>& labels);

}  // namespace ttm

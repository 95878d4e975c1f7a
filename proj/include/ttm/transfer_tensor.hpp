#pragma once

// Transfer tensors under time-translational invariance:
//   T_1 = E_1,   T_n = E_n - sum_{m=1}^{n-1} T_{n-m} E_m
// and propagation rho(t_m) = sum_{s=1}^{min(m,K)} T_s rho(t_{m-s}).

#include <span>
#include <vector>

#include "ttm/dynamical_maps.hpp"
#include "ttm/kernels.hpp"

namespace ttm {

class TransferTensorSequence {
public:
    TransferTensorSequence() = default;
    TransferTensorSequence(double dt, std::vector<SuperOperator> tensors, bool assumed_tti = true);

    Eigen::Index dim() const noexcept { return tensors_.empty() ? 0 : tensors_.front().hilbert_dim(); }
    double dt() const noexcept { return dt_; }
    bool assumed_tti() const noexcept { return assumed_tti_; }
    std::size_t size() const noexcept { return tensors_.size(); }
    /// T_s for s = 1..size().
    const SuperOperator& tensor(std::size_t s) const;
    const std::vector<SuperOperator>& tensors() const noexcept { return tensors_; }

    /// T_1..T_k.
    TransferTensorSequence truncated(std::size_t k) const;

    /// Number of complex values held by the tensors: size() * D^4.
    std::size_t complex_count() const noexcept;

private:
    double dt_ = 0.0;
    std::vector<SuperOperator> tensors_;
    bool assumed_tti_ = true;
};

TransferTensorSequence maps_to_tensors(const DynamicalMapSequence& maps);

/// E_0..E_n rebuilt from the tensors: E_n = sum_{s=1}^{min(n,K)} T_s E_{n-s}.
DynamicalMapSequence tensors_to_maps(const TransferTensorSequence& tensors, std::size_t n);

/// ||T_{k+1}||; RangeError when k >= size().
double truncation_error(const TransferTensorSequence& tensors, std::size_t k);

/// Smallest K < size() with ||T_s|| < tol for every s in (K, size()].
/// Throws InsufficientLearning (carrying the norm profile) when none exists.
std::size_t choose_cutoff(const TransferTensorSequence& tensors, double tol);

/// ||T_s|| for s = 1..size().
std::vector<double> markovianity_profile(const TransferTensorSequence& tensors);

/// Ring buffer of the K most recent vectorized states, newest first.
class PropagationHistory {
public:
    PropagationHistory(Eigen::Index liouville_dim, std::size_t capacity);

    void push(const LiouvilleVector& state);
    std::size_t capacity() const noexcept { return static_cast<std::size_t>(ring_.cols()); }
    /// Number of states held (saturates at capacity).
    std::size_t count() const noexcept { return count_; }
    std::size_t steps() const noexcept { return steps_; }
    /// s-th most recent state, s = 1..count().
    LiouvilleVector recent(std::size_t s) const;

    const Matrix& ring() const noexcept { return ring_; }
    Eigen::Index head() const noexcept { return head_; }

private:
    Matrix ring_;
    Eigen::Index head_ = 0;
    std::size_t count_ = 0;
    std::size_t steps_ = 0;
};

/// Propagates rho(0) for n_total steps with cutoff K; returns n_total + 1 states.
std::vector<Matrix> propagate(const TransferTensorSequence& tensors, std::size_t k_cutoff, const Matrix& rho0,
                              std::size_t n_total, kernels::Exec exec = kernels::Exec::parallel);

/// As above, seeded with states rho(t_0)..rho(t_{L-1}), 1 <= L <= K; the seed is copied into the output.
std::vector<Matrix> propagate(const TransferTensorSequence& tensors, std::size_t k_cutoff,
                              std::span<const Matrix> seed, std::size_t n_total,
                              kernels::Exec exec = kernels::Exec::parallel);

}  // namespace ttm

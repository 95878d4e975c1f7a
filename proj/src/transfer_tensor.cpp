#include "ttm/transfer_tensor.hpp"

#include <sstream>

#include "ttm/errors.hpp"

namespace ttm {

TransferTensorSequence::TransferTensorSequence(double dt, std::vector<SuperOperator> tensors, bool assumed_tti)
    : dt_(dt), tensors_(std::move(tensors)), assumed_tti_(assumed_tti) {
    if (!(dt_ > 0.0)) {
        throw ValidationError("transfer tensors need a positive time step");
    }
    if (tensors_.empty()) {
        throw ValidationError("transfer tensor sequence is empty");
    }
    for (auto& t : tensors_) {
        if (t.liouville_dim() != tensors_.front().liouville_dim()) {
            throw DimensionError("transfer tensors have inconsistent dimensions");
        }
        t = t.as(SuperOpKind::tensor);
    }
}

const SuperOperator& TransferTensorSequence::tensor(std::size_t s) const {
    if (s < 1 || s > tensors_.size()) {
        throw RangeError("transfer tensor index outside 1..size()");
    }
    return tensors_[s - 1];
}

TransferTensorSequence TransferTensorSequence::truncated(std::size_t k) const {
    if (k < 1 || k > tensors_.size()) {
        throw RangeError("cutoff outside 1..size()");
    }
    return TransferTensorSequence(dt_, std::vector<SuperOperator>(tensors_.begin(), tensors_.begin() + k),
                                  assumed_tti_);
}

std::size_t TransferTensorSequence::complex_count() const noexcept {
    const auto d2 = static_cast<std::size_t>(dim() * dim());
    return tensors_.size() * d2 * d2;
}

TransferTensorSequence maps_to_tensors(const DynamicalMapSequence& maps) {
    if (maps.size() < 2) {
        throw ValidationError("at least E_0 and E_1 are required to build transfer tensors");
    }
    const Eigen::Index n = maps[0].liouville_dim();
    if (maps[0].matrix() != Matrix::Identity(n, n)) {
        throw ValidationError("E_0 must be the identity");
    }
    std::vector<SuperOperator> tensors;
    tensors.reserve(maps.size() - 1);
    for (std::size_t k = 1; k < maps.size(); ++k) {
        Matrix t = maps[k].matrix();
        for (std::size_t m = 1; m < k; ++m) {
            t.noalias() -= tensors[k - m - 1].matrix() * maps[m].matrix();
        }
        tensors.emplace_back(std::move(t), SuperOpKind::tensor);
    }
    return TransferTensorSequence(maps.grid().dt, std::move(tensors), true);
}

DynamicalMapSequence tensors_to_maps(const TransferTensorSequence& tensors, std::size_t n) {
    if (n < 1) {
        throw RangeError("tensors_to_maps needs n >= 1");
    }
    const Eigen::Index d2 = tensors.dim() * tensors.dim();
    std::vector<SuperOperator> maps;
    maps.reserve(n + 1);
    maps.push_back(SuperOperator::identity(tensors.dim()));
    for (std::size_t k = 1; k <= n; ++k) {
        Matrix e = Matrix::Zero(d2, d2);
        const std::size_t depth = std::min(k, tensors.size());
        for (std::size_t s = 1; s <= depth; ++s) {
            e.noalias() += tensors.tensor(s).matrix() * maps[k - s].matrix();
        }
        maps.emplace_back(std::move(e), SuperOpKind::map);
    }
    return DynamicalMapSequence(TimeGrid(tensors.dt(), n), std::move(maps));
}

double truncation_error(const TransferTensorSequence& tensors, std::size_t k) {
    if (k >= tensors.size()) {
        std::ostringstream msg;
        msg << "truncation error at K = " << k << " needs T_" << k + 1 << " but only " << tensors.size()
            << " tensors were learned";
        throw RangeError(msg.str());
    }
    return superop_norm(tensors.tensor(k + 1));
}

std::vector<double> markovianity_profile(const TransferTensorSequence& tensors) {
    std::vector<double> norms;
    norms.reserve(tensors.size());
    for (const auto& t : tensors.tensors()) {
        norms.push_back(superop_norm(t));
    }
    return norms;
}

std::size_t choose_cutoff(const TransferTensorSequence& tensors, double tol) {
    if (!(tol > 0.0)) {
        throw ValidationError("cutoff tolerance must be positive");
    }
    const auto norms = markovianity_profile(tensors);
    // Walk back from the tail while norms stay below tol.
    std::size_t k = norms.size();
    while (k > 1 && norms[k - 1] < tol) {
        --k;
    }
    if (k == norms.size()) {
        std::ostringstream msg;
        msg << "no memory cutoff below tolerance " << tol << ": ||T_" << norms.size() << "|| = " << norms.back()
            << "; extend the learning window";
        throw InsufficientLearning(msg.str(), norms);
    }
    return k;
}

PropagationHistory::PropagationHistory(Eigen::Index liouville_dim, std::size_t capacity)
    : ring_(Matrix::Zero(liouville_dim, static_cast<Eigen::Index>(capacity))) {
    if (capacity < 1) {
        throw ValidationError("propagation history needs capacity >= 1");
    }
}

void PropagationHistory::push(const LiouvilleVector& state) {
    if (state.size() != ring_.rows()) {
        throw DimensionError("state dimension differs from history buffer");
    }
    head_ = (head_ + ring_.cols() - 1) % ring_.cols();
    ring_.col(head_) = state;
    count_ = std::min<std::size_t>(count_ + 1, capacity());
    ++steps_;
}

LiouvilleVector PropagationHistory::recent(std::size_t s) const {
    if (s < 1 || s > count_) {
        throw RangeError("history index outside 1..count()");
    }
    return ring_.col((head_ + static_cast<Eigen::Index>(s) - 1) % ring_.cols());
}

std::vector<Matrix> propagate(const TransferTensorSequence& tensors, std::size_t k_cutoff, const Matrix& rho0,
                              std::size_t n_total, kernels::Exec exec) {
    const std::vector<Matrix> seed{rho0};
    return propagate(tensors, k_cutoff, std::span<const Matrix>(seed), n_total, exec);
}

std::vector<Matrix> propagate(const TransferTensorSequence& tensors, std::size_t k_cutoff,
                              std::span<const Matrix> seed, std::size_t n_total, kernels::Exec exec) {
    if (k_cutoff < 1 || k_cutoff > tensors.size()) {
        throw RangeError("cutoff K outside 1..number of tensors");
    }
    if (seed.empty() || seed.size() > k_cutoff) {
        throw ValidationError("seed must hold between 1 and K states");
    }
    if (seed.size() > n_total + 1) {
        throw ValidationError("seed is longer than the requested trajectory");
    }
    const Eigen::Index d = tensors.dim();
    for (const auto& s : seed) {
        if (s.rows() != d || s.cols() != d) {
            throw DimensionError("seed state dimension differs from tensors");
        }
    }
    std::vector<Matrix> tensor_mats;
    tensor_mats.reserve(k_cutoff);
    for (std::size_t s = 1; s <= k_cutoff; ++s) {
        tensor_mats.push_back(tensors.tensor(s).matrix());
    }

    PropagationHistory history(d * d, k_cutoff);
    std::vector<Matrix> out;
    out.reserve(n_total + 1);
    for (const auto& s : seed) {
        history.push(vectorize(s));
        out.push_back(s);
    }
    LiouvilleVector next;
    for (std::size_t m = seed.size(); m <= n_total; ++m) {
        kernels::ttm_step(tensor_mats, history.ring(), history.head(), static_cast<Eigen::Index>(history.count()),
                          next, exec);
        history.push(next);
        out.push_back(devectorize(next));
    }
    return out;
}

}  // namespace ttm

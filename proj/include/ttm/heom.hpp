#pragma once

// Hierarchical equations of motion for a Drude-Lorentz bath.
//
// The bath correlation C(t) = <X(t)X(0)> is expanded as sum_k c_k exp(-nu_k t)
// with the Drude pole nu_0 = gamma and Matsubara frequencies nu_k = 2 pi k / beta.
// Matsubara terms beyond the retained ones enter as a time-local correction
// -Delta [Q, [Q, rho_n]] in every node. Auxiliary operators are rescaled by
// sqrt(prod_k n_k! |c_k|^n_k) so that all nodes stay O(1).
//
// Node equation (rescaled):
//   d rho_n = -i[H, rho_n] - sum_k n_k nu_k rho_n - Delta [Q,[Q,rho_n]]
//             - i sum_k sqrt((n_k+1)|c_k|) [Q, rho_{n+e_k}]
//             - i sum_k sqrt(n_k/|c_k|) (c_k Q rho_{n-e_k} - conj(c_k) rho_{n-e_k} Q)

#include <vector>

#include "ttm/generators.hpp"
#include "ttm/kernels.hpp"

namespace ttm::heom {

struct BathExponent {
    Complex c;
    double nu = 0.0;
};

/// Drude pole followed by `n_matsubara` Matsubara terms.
std::vector<BathExponent> drude_lorentz_exponents(double lambda, double gamma, double beta, int n_matsubara);

/// Sum of c_k / nu_k over the Matsubara terms that were not retained.
double matsubara_residual(double lambda, double gamma, double beta, int n_matsubara);

/// Multi-indices of total order <= depth in lexicographic order, with raise/lower tables.
class HierarchyIndex {
public:
    HierarchyIndex(int n_modes, int depth);

    std::size_t size() const noexcept { return nodes_.size(); }
    int n_modes() const noexcept { return n_modes_; }
    int depth() const noexcept { return depth_; }
    const std::vector<int>& node(std::size_t n) const { return nodes_[n]; }
    /// Index of n + e_k, or -1 beyond the truncation tier.
    long raise(std::size_t n, int k) const { return raise_[n * n_modes_ + k]; }
    /// Index of n - e_k, or -1 when n_k = 0.
    long lower(std::size_t n, int k) const { return lower_[n * n_modes_ + k]; }

private:
    int n_modes_;
    int depth_;
    std::vector<std::vector<int>> nodes_;
    std::vector<long> raise_;
    std::vector<long> lower_;
};

/// Sparse generator on the node-major stacked Liouville space (row = node*D^2 + a).
kernels::CsrMatrix build_generator(const Matrix& h, const Matrix& q, const std::vector<BathExponent>& exps,
                                   double residual, const HierarchyIndex& index);

/// Integrates the hierarchy with every basis element as initial condition and
/// returns the tier-0 dynamical maps E_0..E_n (as D^2 x D^2 matrices).
/// The RK4 substep is the largest h <= integrator_dt dividing dt evenly with
/// h * (Gershgorin bound of the generator) <= 2.5.
std::vector<Matrix> propagate_maps(const kernels::CsrMatrix& generator, Eigen::Index hilbert_dim,
                                   const TimeGrid& grid, double integrator_dt, kernels::Exec exec);

}  // namespace ttm::heom

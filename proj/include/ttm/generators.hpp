#pragma once

// Reference trajectory sources. Each generator evolves every canonical basis
// element |i><j| and returns the full BasisTrajectorySet on a uniform grid.

#include <cstddef>
#include <vector>

#include "ttm/kernels.hpp"
#include "ttm/liouville.hpp"

namespace ttm {

struct TimeGrid {
    double dt = 0.1;
    std::size_t n_steps = 1;

    TimeGrid() = default;
    TimeGrid(double dt_, std::size_t n_steps_);

    double time(std::size_t k) const noexcept { return dt * static_cast<double>(k); }
    std::size_t n_frames() const noexcept { return n_steps + 1; }
};

/// Frames rho^{(ij)}(t_k) for every basis element (i, j), k = 0..n_steps.
class BasisTrajectorySet {
public:
    BasisTrajectorySet() = default;
    /// frames[i*D + j][k]; validates frame counts and shapes.
    BasisTrajectorySet(Eigen::Index dim, TimeGrid grid, std::vector<std::vector<Matrix>> frames);

    Eigen::Index dim() const noexcept { return dim_; }
    const TimeGrid& grid() const noexcept { return grid_; }

    const std::vector<Matrix>& trajectory(Eigen::Index i, Eigen::Index j) const;
    const Matrix& frame(Eigen::Index i, Eigen::Index j, std::size_t k) const;
    const std::vector<std::vector<Matrix>>& frames() const noexcept { return frames_; }

    /// First `n_steps` steps (n_steps + 1 frames) of this set.
    BasisTrajectorySet truncated(std::size_t n_steps) const;

    /// Assembles sum_ij rho0(i,j) * rho^{(ij)}(t_k) for every k.
    std::vector<Matrix> evolve(const Matrix& rho0) const;

    /// Throws ValidationError unless frame 0 is the exact basis element and
    /// (j,i) frames are daggers of (i,j) frames within `tol`.
    void validate(double tol = 1e-8) const;

private:
    Eigen::Index dim_ = 0;
    TimeGrid grid_;
    std::vector<std::vector<Matrix>> frames_;
};

/// Two-level spin-boson model with a Drude-Lorentz bath, in units where hbar = 1.
///
/// H_s = (omega0/2) sigma_z + j_coupling sigma_x: omega0 is the site-energy
/// difference and j_coupling the off-diagonal tunnelling element. The bath couples
/// through `coupling_op` with spectral density J(w) = 2 lambda gamma w / (w^2 + gamma^2).
struct SpinBosonParams {
    double omega0 = 1.0;
    double j_coupling = 1.0;
    double lambda = 0.1;
    double gamma = 1.0;
    double beta = 0.5;
    Matrix coupling_op = pauli::z();

    Matrix system_hamiltonian() const;
    void validate() const;
};

struct HeomConfig {
    int depth = 6;
    int n_matsubara = 1;
    double integrator_dt = 0.005;
    kernels::Exec exec = kernels::Exec::parallel;

    void validate(double grid_dt) const;
};

BasisTrajectorySet gen_unitary(const Matrix& h, const TimeGrid& grid);

/// Lindblad evolution with classical RK4 at a fixed substep <= dt/10.
BasisTrajectorySet gen_lindblad(const Matrix& h, const std::vector<Matrix>& jump_ops,
                                const std::vector<double>& rates, const TimeGrid& grid);

/// Drude-Lorentz line-broadening function g(t) = int_0^t ds int_0^s du C(u).
/// The real part is evaluated by adaptive quadrature over the spectral density,
/// the imaginary part in closed form.
Complex dephasing_lineshape(double lambda, double gamma, double beta, double t);

/// Exact pure-dephasing solution. Requires [H_s, coupling_op] = 0.
BasisTrajectorySet gen_dephasing_analytic(const SpinBosonParams& params, const TimeGrid& grid);

BasisTrajectorySet gen_heom(const SpinBosonParams& params, const HeomConfig& cfg, const TimeGrid& grid);

struct HeomConvergenceReport {
    bool converged = false;
    double tol = 0.0;
    double max_deviation = 0.0;
    /// Max |delta| over the grid and all initial basis elements, per observable (n, m).
    Eigen::MatrixXd element_deviation;
    HeomConfig base;
    HeomConfig refined;
};

/// Compares cfg against (depth + 2, n_matsubara + 1).
HeomConvergenceReport heom_converged(const SpinBosonParams& params, const HeomConfig& cfg,
                                     const TimeGrid& grid, double tol);

}  // namespace ttm

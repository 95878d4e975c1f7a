#include "ttm/generators.hpp"

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include "ttm/errors.hpp"
#include "ttm/heom.hpp"

namespace ttm {

TimeGrid::TimeGrid(double dt_, std::size_t n_steps_) : dt(dt_), n_steps(n_steps_) {
    if (!(dt > 0.0) || n_steps < 1) {
        throw ValidationError("time grid requires dt > 0 and n_steps >= 1");
    }
}

BasisTrajectorySet::BasisTrajectorySet(Eigen::Index dim, TimeGrid grid, std::vector<std::vector<Matrix>> frames)
    : dim_(dim), grid_(grid), frames_(std::move(frames)) {
    if (dim < 1 || static_cast<Eigen::Index>(frames_.size()) != dim * dim) {
        throw DimensionError("basis trajectory set needs D^2 trajectories");
    }
    for (const auto& traj : frames_) {
        if (traj.size() != grid_.n_frames()) {
            throw DimensionError("trajectory frame count differs from grid");
        }
        for (const auto& f : traj) {
            if (f.rows() != dim || f.cols() != dim) {
                throw DimensionError("trajectory frame has wrong shape");
            }
        }
    }
}

const std::vector<Matrix>& BasisTrajectorySet::trajectory(Eigen::Index i, Eigen::Index j) const {
    if (i < 0 || j < 0 || i >= dim_ || j >= dim_) {
        throw RangeError("basis label outside dimension");
    }
    return frames_[static_cast<std::size_t>(i * dim_ + j)];
}

const Matrix& BasisTrajectorySet::frame(Eigen::Index i, Eigen::Index j, std::size_t k) const {
    const auto& traj = trajectory(i, j);
    if (k >= traj.size()) {
        throw RangeError("frame index beyond grid");
    }
    return traj[k];
}

BasisTrajectorySet BasisTrajectorySet::truncated(std::size_t n_steps) const {
    if (n_steps < 1 || n_steps > grid_.n_steps) {
        throw RangeError("truncation length outside the grid");
    }
    auto frames = frames_;
    for (auto& traj : frames) {
        traj.resize(n_steps + 1);
    }
    return BasisTrajectorySet(dim_, TimeGrid(grid_.dt, n_steps), std::move(frames));
}

std::vector<Matrix> BasisTrajectorySet::evolve(const Matrix& rho0) const {
    if (rho0.rows() != dim_ || rho0.cols() != dim_) {
        throw DimensionError("initial state dimension differs from trajectory set");
    }
    std::vector<Matrix> out(grid_.n_frames(), Matrix::Zero(dim_, dim_));
    for (Eigen::Index i = 0; i < dim_; ++i) {
        for (Eigen::Index j = 0; j < dim_; ++j) {
            const Complex c = rho0(i, j);
            if (c == Complex(0.0, 0.0)) {
                continue;
            }
            const auto& traj = trajectory(i, j);
            for (std::size_t k = 0; k < out.size(); ++k) {
                out[k] += c * traj[k];
            }
        }
    }
    return out;
}

void BasisTrajectorySet::validate(double tol) const {
    for (Eigen::Index i = 0; i < dim_; ++i) {
        for (Eigen::Index j = 0; j < dim_; ++j) {
            if (trajectory(i, j).front() != BasisElement{dim_, i, j}.matrix()) {
                std::ostringstream msg;
                msg << "trajectory (" << i << "," << j << ") does not start at its basis element";
                throw ValidationError(msg.str());
            }
            if (j < i) {
                continue;
            }
            const auto& a = trajectory(i, j);
            const auto& b = trajectory(j, i);
            for (std::size_t k = 0; k < a.size(); ++k) {
                if ((b[k] - a[k].adjoint()).cwiseAbs().maxCoeff() > tol) {
                    std::ostringstream msg;
                    msg << "trajectories (" << i << "," << j << ") and (" << j << "," << i
                        << ") are not dagger-symmetric at step " << k;
                    throw ValidationError(msg.str());
                }
            }
        }
    }
}

Matrix SpinBosonParams::system_hamiltonian() const {
    return 0.5 * omega0 * pauli::z() + j_coupling * pauli::x();
}

void SpinBosonParams::validate() const {
    if (lambda < 0.0) {
        throw ValidationError("reorganization energy lambda must be >= 0");
    }
    if (!(gamma > 0.0) || !(beta > 0.0)) {
        throw ValidationError("gamma and beta must be positive");
    }
    if (coupling_op.rows() != 2 || !is_hermitian(coupling_op)) {
        throw ValidationError("coupling operator must be a 2x2 Hermitian matrix");
    }
}

void HeomConfig::validate(double grid_dt) const {
    if (depth < 1 || n_matsubara < 0) {
        throw ValidationError("HEOM needs depth >= 1 and n_matsubara >= 0");
    }
    if (!(integrator_dt > 0.0) || integrator_dt > grid_dt * (1.0 + 1e-12)) {
        throw ValidationError("HEOM integrator step must be positive and <= grid dt");
    }
}

namespace {

std::vector<std::vector<Matrix>> frames_from_maps(const std::vector<Matrix>& maps, Eigen::Index d) {
    const Eigen::Index d2 = d * d;
    std::vector<std::vector<Matrix>> frames(static_cast<std::size_t>(d2));
    for (Eigen::Index a = 0; a < d2; ++a) {
        auto& traj = frames[static_cast<std::size_t>(a)];
        traj.reserve(maps.size());
        for (const auto& m : maps) {
            traj.push_back(devectorize(m.col(a)));
        }
    }
    // Basis frames are exact by definition; integration starts from them.
    for (Eigen::Index a = 0; a < d2; ++a) {
        frames[static_cast<std::size_t>(a)].front() = BasisElement{d, a / d, a % d}.matrix();
    }
    return frames;
}

}  // namespace

BasisTrajectorySet gen_unitary(const Matrix& h, const TimeGrid& grid) {
    if (!is_hermitian(h)) {
        throw ValidationError("gen_unitary requires a Hermitian Hamiltonian");
    }
    const Eigen::Index d = h.rows();
    std::vector<Matrix> props(grid.n_frames());
    for (std::size_t k = 0; k < grid.n_frames(); ++k) {
        props[k] = unitary_propagator(h, grid.time(k));
    }
    std::vector<std::vector<Matrix>> frames(static_cast<std::size_t>(d * d));
    const auto n_basis = static_cast<long>(d * d);
#pragma omp parallel for schedule(static)
    for (long a = 0; a < n_basis; ++a) {
        const Matrix e = BasisElement{d, a / d, a % d}.matrix();
        auto& traj = frames[static_cast<std::size_t>(a)];
        traj.resize(grid.n_frames());
        traj[0] = e;
        for (std::size_t k = 1; k < grid.n_frames(); ++k) {
            traj[k] = props[k] * e * props[k].adjoint();
        }
    }
    return BasisTrajectorySet(d, grid, std::move(frames));
}

BasisTrajectorySet gen_lindblad(const Matrix& h, const std::vector<Matrix>& jump_ops,
                                const std::vector<double>& rates, const TimeGrid& grid) {
    if (!is_hermitian(h)) {
        throw ValidationError("gen_lindblad requires a Hermitian Hamiltonian");
    }
    if (jump_ops.size() != rates.size()) {
        throw ValidationError("one rate per jump operator is required");
    }
    const Eigen::Index d = h.rows();
    double scale = h.operatorNorm();
    for (std::size_t m = 0; m < rates.size(); ++m) {
        if (rates[m] < 0.0) {
            throw ValidationError("Lindblad rates must be nonnegative");
        }
        if (jump_ops[m].rows() != d || jump_ops[m].cols() != d) {
            throw DimensionError("jump operator dimension differs from Hamiltonian");
        }
        scale += rates[m] * jump_ops[m].squaredNorm();
    }
    const auto substeps = std::max<std::size_t>(10, static_cast<std::size_t>(std::ceil(grid.dt * scale * 20.0)));
    const double step = grid.dt / static_cast<double>(substeps);

    std::vector<Matrix> anticomm(rates.size());
    for (std::size_t m = 0; m < rates.size(); ++m) {
        anticomm[m] = 0.5 * jump_ops[m].adjoint() * jump_ops[m];
    }
    const Complex im(0.0, 1.0);
    auto rhs = [&](const Matrix& rho) {
        Matrix out = -im * (h * rho - rho * h);
        for (std::size_t m = 0; m < rates.size(); ++m) {
            out += rates[m] * (jump_ops[m] * rho * jump_ops[m].adjoint() - anticomm[m] * rho - rho * anticomm[m]);
        }
        return out;
    };

    std::vector<std::vector<Matrix>> frames(static_cast<std::size_t>(d * d));
    const auto n_basis = static_cast<long>(d * d);
#pragma omp parallel for schedule(static)
    for (long a = 0; a < n_basis; ++a) {
        Matrix rho = BasisElement{d, a / d, a % d}.matrix();
        auto& traj = frames[static_cast<std::size_t>(a)];
        traj.reserve(grid.n_frames());
        traj.push_back(rho);
        for (std::size_t k = 1; k < grid.n_frames(); ++k) {
            for (std::size_t s = 0; s < substeps; ++s) {
                const Matrix k1 = rhs(rho);
                const Matrix k2 = rhs(rho + 0.5 * step * k1);
                const Matrix k3 = rhs(rho + 0.5 * step * k2);
                const Matrix k4 = rhs(rho + step * k3);
                rho += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            traj.push_back(rho);
        }
    }
    return BasisTrajectorySet(d, grid, std::move(frames));
}

namespace {

struct LineshapeParams {
    double lambda;
    double gamma;
    double beta;
    double t;
};

// J(w) coth(beta w / 2) / w^2 for the Drude-Lorentz density.
double weighted_density(double w, const LineshapeParams& p) {
    return 2.0 * p.lambda * p.gamma / (w * (w * w + p.gamma * p.gamma) * std::tanh(p.beta * w / 2.0));
}

double lineshape_head(double w, void* raw) {
    const auto& p = *static_cast<const LineshapeParams*>(raw);
    const double s = std::sin(w * p.t / 2.0);
    return weighted_density(w, p) * 2.0 * s * s;
}

double lineshape_tail(double w, void* raw) { return weighted_density(w, *static_cast<const LineshapeParams*>(raw)); }

struct WorkspaceDeleter {
    void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
    void operator()(gsl_integration_qawo_table* w) const { gsl_integration_qawo_table_free(w); }
};

void check_gsl(int status, const char* stage) {
    if (status != GSL_SUCCESS && status != GSL_EROUND) {
        throw Error(std::string("lineshape quadrature failed in ") + stage + ": " + gsl_strerror(status));
    }
}

void disable_gsl_abort() {
    static std::once_flag flag;
    std::call_once(flag, [] { gsl_set_error_handler_off(); });
}

}  // namespace

Complex dephasing_lineshape(double lambda, double gamma, double beta, double t) {
    if (t == 0.0 || lambda == 0.0) {
        return {0.0, 0.0};
    }
    disable_gsl_abort();
    t = std::abs(t);
    LineshapeParams p{lambda, gamma, beta, t};
    constexpr std::size_t limit = 4000;
    std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter> ws(gsl_integration_workspace_alloc(limit));
    std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter> cycles(gsl_integration_workspace_alloc(limit));
    std::unique_ptr<gsl_integration_qawo_table, WorkspaceDeleter> table(
        gsl_integration_qawo_table_alloc(t, 1.0, GSL_INTEG_COSINE, 50));

    // Split at a few oscillation periods: the head carries the 1 - cos(wt)
    // form directly, the tail is int F - int F cos(wt) on [split, inf).
    const double split = 8.0 * std::numbers::pi / t;
    gsl_function head{&lineshape_head, &p};
    gsl_function tail{&lineshape_tail, &p};
    double head_val = 0.0, tail_val = 0.0, osc_val = 0.0, err = 0.0;
    check_gsl(gsl_integration_qag(&head, 0.0, split, 0.0, 1e-11, limit, GSL_INTEG_GAUSS61, ws.get(), &head_val, &err),
              "head");
    check_gsl(gsl_integration_qagiu(&tail, split, 0.0, 1e-11, limit, ws.get(), &tail_val, &err), "tail");
    const double osc_tol = 1e-13 * std::max(1.0, std::abs(head_val) + std::abs(tail_val));
    check_gsl(gsl_integration_qawf(&tail, split, osc_tol, limit, ws.get(), cycles.get(), table.get(), &osc_val, &err),
              "oscillatory tail");
    const double re = (head_val + tail_val - osc_val) / std::numbers::pi;
    // Im C(u) = -lambda gamma exp(-gamma u) integrated twice.
    const double im = -(lambda / gamma) * (gamma * t - 1.0 + std::exp(-gamma * t));
    return {re, im};
}

BasisTrajectorySet gen_dephasing_analytic(const SpinBosonParams& params, const TimeGrid& grid) {
    params.validate();
    const Matrix h = params.system_hamiltonian();
    const Matrix& q = params.coupling_op;
    const double scale = std::max({1.0, h.cwiseAbs().maxCoeff(), q.cwiseAbs().maxCoeff()});
    if ((h * q - q * h).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw ConfigurationError("pure-dephasing solution requires a coupling operator commuting with H_s");
    }
    const Eigen::Index d = h.rows();
    // A generic combination of two commuting Hermitian matrices has a common eigenbasis.
    Eigen::SelfAdjointEigenSolver<Matrix> es(h + std::numbers::sqrt2 * q);
    const Matrix v = es.eigenvectors();
    const Matrix hd = v.adjoint() * h * v;
    const Matrix qd = v.adjoint() * q * v;
    Eigen::VectorXd energy(d), charge(d);
    for (Eigen::Index n = 0; n < d; ++n) {
        energy(n) = hd(n, n).real();
        charge(n) = qd(n, n).real();
    }

    std::vector<Complex> g(grid.n_frames());
    for (std::size_t k = 0; k < grid.n_frames(); ++k) {
        g[k] = dephasing_lineshape(params.lambda, params.gamma, params.beta, grid.time(k));
    }

    std::vector<std::vector<Matrix>> frames(static_cast<std::size_t>(d * d));
    for (Eigen::Index a = 0; a < d * d; ++a) {
        const Matrix e = BasisElement{d, a / d, a % d}.matrix();
        const Matrix e_eig = v.adjoint() * e * v;
        auto& traj = frames[static_cast<std::size_t>(a)];
        traj.reserve(grid.n_frames());
        traj.push_back(e);
        for (std::size_t k = 1; k < grid.n_frames(); ++k) {
            const double t = grid.time(k);
            Matrix r(d, d);
            for (Eigen::Index n = 0; n < d; ++n) {
                for (Eigen::Index m = 0; m < d; ++m) {
                    const Complex decay = (charge(n) - charge(m)) * (charge(n) * g[k] - charge(m) * std::conj(g[k]));
                    r(n, m) = e_eig(n, m) * std::exp(Complex(0.0, -(energy(n) - energy(m)) * t) - decay);
                }
            }
            traj.push_back(v * r * v.adjoint());
        }
    }
    return BasisTrajectorySet(d, grid, std::move(frames));
}

BasisTrajectorySet gen_heom(const SpinBosonParams& params, const HeomConfig& cfg, const TimeGrid& grid) {
    params.validate();
    cfg.validate(grid.dt);
    const auto exps = heom::drude_lorentz_exponents(params.lambda, params.gamma, params.beta, cfg.n_matsubara);
    const double residual = heom::matsubara_residual(params.lambda, params.gamma, params.beta, cfg.n_matsubara);
    const heom::HierarchyIndex index(static_cast<int>(exps.size()), cfg.depth);
    const auto generator =
        heom::build_generator(params.system_hamiltonian(), params.coupling_op, exps, residual, index);
    const auto maps = heom::propagate_maps(generator, 2, grid, cfg.integrator_dt, cfg.exec);
    return BasisTrajectorySet(2, grid, frames_from_maps(maps, 2));
}

HeomConvergenceReport heom_converged(const SpinBosonParams& params, const HeomConfig& cfg, const TimeGrid& grid,
                                     double tol) {
    HeomConvergenceReport report;
    report.tol = tol;
    report.base = cfg;
    report.refined = cfg;
    report.refined.depth += 2;
    report.refined.n_matsubara += 1;
    const auto a = gen_heom(params, report.base, grid);
    const auto b = gen_heom(params, report.refined, grid);
    const Eigen::Index d = a.dim();
    report.element_deviation = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t t = 0; t < a.frames().size(); ++t) {
        for (std::size_t k = 0; k < grid.n_frames(); ++k) {
            const Eigen::MatrixXd diff = (a.frames()[t][k] - b.frames()[t][k]).cwiseAbs();
            report.element_deviation = report.element_deviation.cwiseMax(diff);
        }
    }
    report.max_deviation = report.element_deviation.maxCoeff();
    report.converged = report.max_deviation < tol;
    return report;
}

}  // namespace ttm

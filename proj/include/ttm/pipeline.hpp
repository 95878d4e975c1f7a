#pragma once

// Batch pipeline: generate -> learn -> propagate -> kernel -> analyze.
// Each stage is available as a library call on in-memory file objects; the
// command-line front end in run_cli reads and writes the files.

#include <optional>
#include <string>
#include <vector>

#include "ttm/analysis.hpp"
#include "ttm/errors.hpp"
#include "ttm/generators.hpp"
#include "ttm/io.hpp"

namespace ttm::pipeline {

enum class ModelKind { unitary, lindblad, dephasing, heom };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

struct ModelSpec {
    ModelKind kind = ModelKind::heom;
    SpinBosonParams params;
    HeomConfig heom;
    /// Lindblad rates for sigma_- and sigma_z jumps.
    double damping_rate = 0.1;
    double dephasing_rate = 0.0;

    void validate(double dt) const;
    io::Json to_json() const;
    /// Reads the "model" object written by to_json.
    static ModelSpec from_json(const io::Json& j);
};

struct CutoffPolicy {
    std::optional<std::size_t> fixed_k;
    double tol = 1e-6;

    std::string describe() const;
};

struct EquilibriumOptions {
    double tol = 1e-6;
    std::size_t window = 50;
};

struct PipelineConfig {
    ModelSpec model;
    double dt = 0.1;
    std::size_t learn_steps = 50;
    std::size_t total_steps = 500;
    CutoffPolicy cutoff;
    Matrix initial = Matrix();
    EquilibriumOptions equilibrium;
    std::vector<double> sweep_lambdas;
    /// k_B T in energy units.
    std::vector<double> sweep_temperatures;

    void validate() const;
};

/// HEOM output failed the depth/Matsubara refinement test.
class NotConverged : public Error {
public:
    NotConverged(const std::string& what, HeomConvergenceReport report) : Error(what), report_(std::move(report)) {}
    const HeomConvergenceReport& report() const noexcept { return report_; }

private:
    HeomConvergenceReport report_;
};

/// Runs the model generator. For HEOM with `convergence_tol` set, the result
/// is accepted only if heom_converged passes; otherwise NotConverged is thrown.
io::TrajectoryFile generate(const ModelSpec& model, const TimeGrid& grid,
                            std::optional<double> convergence_tol = std::nullopt);

/// Learns all tensors of the (optionally truncated) window and applies the cutoff policy.
io::TensorFile learn(const io::TrajectoryFile& traj, const CutoffPolicy& policy,
                     std::optional<std::size_t> learn_steps = std::nullopt);

io::PropagatedFile propagate(const io::TensorFile& tensors, const Matrix& rho0, std::size_t n_steps,
                             const EquilibriumOptions& eq = {}, kernels::Exec exec = kernels::Exec::parallel);

/// Kernel table for `labels` (all D^4 elements when empty).
KernelTable kernel(const io::TensorFile& tensors, const std::optional<Matrix>& known_h,
                   const std::vector<ElementLabel>& labels = {});

/// Sweep row for a propagated trajectory; the model metadata supplies H_s, beta and lambda.
io::SweepRow analyze(const io::PropagatedFile& traj, const EquilibriumOptions& eq);

/// generate -> learn -> propagate -> analyze for every point of the sweep grid:
/// the lambda list at the model temperature, then the temperature list at the
/// model lambda. Points run concurrently when `jobs` > 1.
std::vector<io::SweepRow> run_sweep(const PipelineConfig& cfg, int jobs = 1);

/// "e11", "e22", ... (1-based diagonal projectors), "plus", "mixed", or a JSON file path.
Matrix initial_state(const std::string& spec, Eigen::Index dim);

/// Command-line entry point. Exit codes: 0 success, 2 validation or schema
/// error, 3 numerical failure.
int run_cli(int argc, const char* const* argv);

}  // namespace ttm::pipeline

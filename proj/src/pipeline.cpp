#include "ttm/pipeline.hpp"

#include <cmath>
#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <omp.h>

#include "CLI11.hpp"
#include "ttm/dynamical_maps.hpp"
#include "ttm/nz_kernel.hpp"
#include "ttm/transfer_tensor.hpp"
#include "ttm/units.hpp"

namespace ttm::pipeline {

namespace {

void log(const std::string& msg) {
    std::cerr << "[ttm] " << msg << "\n";
}

Matrix coupling_from_name(const std::string& name) {
    if (name == "z") return pauli::z();
    if (name == "x") return pauli::x();
    if (name == "y") return pauli::y();
    throw ValidationError("coupling operator must be one of x, y, z; got '" + name + "'");
}

double json_number(const io::Json& j, const char* key, double fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number()) throw SchemaError("expected a number", std::string("model.") + key);
    return it->get<double>();
}

}  // namespace

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::unitary: return "unitary";
        case ModelKind::lindblad: return "lindblad";
        case ModelKind::dephasing: return "dephasing";
        case ModelKind::heom: return "heom";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "unitary") return ModelKind::unitary;
    if (s == "lindblad") return ModelKind::lindblad;
    if (s == "dephasing") return ModelKind::dephasing;
    if (s == "heom") return ModelKind::heom;
    throw ValidationError("unknown model '" + s + "' (expected unitary, lindblad, dephasing or heom)");
}

void ModelSpec::validate(double dt) const {
    params.validate();
    if (kind == ModelKind::heom) {
        heom.validate(dt);
    }
    if (kind == ModelKind::lindblad && (!(damping_rate >= 0.0) || !(dephasing_rate >= 0.0))) {
        throw ValidationError("Lindblad rates must be non-negative");
    }
}

io::Json ModelSpec::to_json() const {
    io::Json j = io::Json::object();
    j["kind"] = to_string(kind);
    j["omega0"] = params.omega0;
    j["j"] = params.j_coupling;
    j["hamiltonian"] = io::matrix_to_json(params.system_hamiltonian());
    if (kind == ModelKind::lindblad) {
        j["damping_rate"] = damping_rate;
        j["dephasing_rate"] = dephasing_rate;
    }
    if (kind == ModelKind::heom || kind == ModelKind::dephasing) {
        j["lambda"] = params.lambda;
        j["gamma"] = params.gamma;
        j["beta"] = params.beta;
        j["coupling_op"] = io::matrix_to_json(params.coupling_op);
    }
    if (kind == ModelKind::heom) {
        j["heom"] = {{"depth", heom.depth}, {"n_matsubara", heom.n_matsubara}, {"integrator_dt", heom.integrator_dt}};
    }
    return j;
}

ModelSpec ModelSpec::from_json(const io::Json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        throw SchemaError("model metadata missing", "model.kind");
    }
    ModelSpec m;
    m.kind = model_kind_from_string(j["kind"].get<std::string>());
    m.params.omega0 = json_number(j, "omega0", m.params.omega0);
    m.params.j_coupling = json_number(j, "j", m.params.j_coupling);
    m.params.lambda = json_number(j, "lambda", m.params.lambda);
    m.params.gamma = json_number(j, "gamma", m.params.gamma);
    m.params.beta = json_number(j, "beta", m.params.beta);
    m.damping_rate = json_number(j, "damping_rate", m.damping_rate);
    m.dephasing_rate = json_number(j, "dephasing_rate", m.dephasing_rate);
    if (auto it = j.find("coupling_op"); it != j.end()) {
        m.params.coupling_op = io::matrix_from_json(*it, "model.coupling_op");
    }
    if (auto it = j.find("heom"); it != j.end() && it->is_object()) {
        m.heom.depth = it->value("depth", m.heom.depth);
        m.heom.n_matsubara = it->value("n_matsubara", m.heom.n_matsubara);
        m.heom.integrator_dt = it->value("integrator_dt", m.heom.integrator_dt);
    }
    return m;
}

std::string CutoffPolicy::describe() const {
    std::ostringstream s;
    if (fixed_k) {
        s << "fixed K=" << *fixed_k;
    } else {
        s << "tol=" << io::format_number(tol);
    }
    return s.str();
}

void PipelineConfig::validate() const {
    if (learn_steps < 2) {
        throw ValidationError("learn_steps must be at least 2");
    }
    if (total_steps < learn_steps) {
        throw ValidationError("total_steps must be at least learn_steps");
    }
    if (cutoff.fixed_k && (*cutoff.fixed_k < 1 || *cutoff.fixed_k > learn_steps)) {
        throw ValidationError("fixed cutoff must lie in [1, learn_steps]");
    }
    model.validate(dt);
}

io::TrajectoryFile generate(const ModelSpec& model, const TimeGrid& grid, std::optional<double> convergence_tol) {
    model.validate(grid.dt);
    const Matrix h = model.params.system_hamiltonian();
    io::TrajectoryFile out;
    out.model = model.to_json();
    switch (model.kind) {
        case ModelKind::unitary:
            out.set = gen_unitary(h, grid);
            break;
        case ModelKind::lindblad: {
            std::vector<Matrix> jumps;
            std::vector<double> rates;
            if (model.damping_rate > 0.0) {
                jumps.push_back(pauli::minus());
                rates.push_back(model.damping_rate);
            }
            if (model.dephasing_rate > 0.0) {
                jumps.push_back(pauli::z());
                rates.push_back(model.dephasing_rate);
            }
            out.set = gen_lindblad(h, jumps, rates, grid);
            break;
        }
        case ModelKind::dephasing:
            out.set = gen_dephasing_analytic(model.params, grid);
            break;
        case ModelKind::heom:
            if (convergence_tol) {
                HeomConvergenceReport report = heom_converged(model.params, model.heom, grid, *convergence_tol);
                std::ostringstream s;
                s << "HEOM refinement (depth " << report.base.depth << "->" << report.refined.depth << ", matsubara "
                  << report.base.n_matsubara << "->" << report.refined.n_matsubara
                  << "): max deviation " << io::format_number(report.max_deviation);
                log(s.str());
                if (!report.converged) {
                    throw NotConverged(s.str() + " exceeds tol " + io::format_number(*convergence_tol),
                                       std::move(report));
                }
            }
            out.set = gen_heom(model.params, model.heom, grid);
            break;
    }
    return out;
}

io::TensorFile learn(const io::TrajectoryFile& traj, const CutoffPolicy& policy,
                     std::optional<std::size_t> learn_steps) {
    BasisTrajectorySet set = traj.set;
    if (learn_steps) {
        if (*learn_steps < 1 || *learn_steps > set.grid().n_steps) {
            throw ValidationError("learn_steps must lie in [1, n_steps of the trajectory file]");
        }
        set = set.truncated(*learn_steps);
    }
    set.validate();
    const TransferTensorSequence all = maps_to_tensors(extract_maps(set));
    io::TensorFile out;
    out.learned_count = all.size();
    out.markovianity_profile = markovianity_profile(all);
    out.cutoff_policy = policy.describe();
    out.model = traj.model;
    std::size_t k = 0;
    if (policy.fixed_k) {
        k = *policy.fixed_k;
        if (k < 1 || k > all.size()) {
            throw ValidationError("fixed cutoff exceeds the number of learned tensors");
        }
    } else {
        k = choose_cutoff(all, policy.tol);
    }
    if (k < all.size()) {
        out.truncation_error = truncation_error(all, k);
    }
    out.tensors = all.truncated(k);
    return out;
}

io::PropagatedFile propagate(const io::TensorFile& tensors, const Matrix& rho0, std::size_t n_steps,
                             const EquilibriumOptions& eq, kernels::Exec exec) {
    const auto& ts = tensors.tensors;
    if (rho0.rows() != ts.dim() || rho0.cols() != ts.dim()) {
        throw DimensionError("initial state dimension does not match the tensors");
    }
    DensityMatrix checked(rho0);
    io::PropagatedFile out;
    out.grid = TimeGrid(ts.dt(), n_steps);
    out.initial = checked.matrix();
    out.frames = ttm::propagate(ts, ts.size(), out.initial, n_steps, exec);
    out.model = tensors.model;

    io::Json summary = io::Json::object();
    summary["cutoff_k"] = ts.size();
    summary["final_state"] = io::matrix_to_json(out.frames.back());
    double drift = 0.0;
    for (const Matrix& m : out.frames) {
        drift = std::max(drift, std::abs(m.trace() - Complex(1.0, 0.0)));
    }
    summary["trace_drift"] = drift;
    if (ts.dim() >= 2 && out.frames.size() >= 8) {
        std::vector<double> pd(out.frames.size());
        for (std::size_t k = 0; k < pd.size(); ++k) {
            pd[k] = out.frames[k](0, 0).real() - out.frames[k](1, 1).real();
        }
        const OscillationMetrics om = oscillation_metrics(pd, ts.dt());
        summary["population_difference"] = {
            {"sign_changes", om.sign_changes},
            {"envelope_decay_rate", om.envelope_decay_rate ? io::Json(*om.envelope_decay_rate) : io::Json(nullptr)},
            {"asymptote", om.asymptote}};
    }
    try {
        const EquilibriumReport rep = detect_equilibrium(out.frames, eq.tol, eq.window);
        io::Json pops = io::Json::array();
        for (Eigen::Index i = 0; i < rep.rho_eq.rows(); ++i) {
            pops.push_back(rep.rho_eq(i, i).real());
        }
        summary["equilibrium"] = {{"settled", true},
                                  {"settled_at", rep.settled_at},
                                  {"residual", rep.residual},
                                  {"populations", pops},
                                  {"state", io::matrix_to_json(rep.rho_eq)}};
    } catch (const NotSettled& e) {
        summary["equilibrium"] = {{"settled", false},
                                  {"residual", std::isfinite(e.residual()) ? io::Json(e.residual()) : io::Json(nullptr)}};
    }
    out.summary = std::move(summary);
    return out;
}

KernelTable kernel(const io::TensorFile& tensors, const std::optional<Matrix>& known_h,
                   const std::vector<ElementLabel>& labels) {
    const auto& ts = tensors.tensors;
    const LiouvillianEstimate est = extract_liouvillian(ts.tensor(1), ts.dt(), known_h);
    if (!known_h) {
        log("Liouvillian estimated from T_1; remainder norm " + io::format_number(est.remainder_norm));
    }
    const KernelSequence seq = extract_kernel(ts, est.liouvillian);
    return kernel_report(seq, labels.empty() ? all_element_labels(ts.dim()) : labels);
}

io::SweepRow analyze(const io::PropagatedFile& traj, const EquilibriumOptions& eq) {
    const ModelSpec model = ModelSpec::from_json(traj.model);
    io::SweepRow row;
    row.lambda = model.params.lambda;
    row.temperature = 1.0 / model.params.beta;
    try {
        const EquilibriumReport rep = detect_equilibrium(traj.frames, eq.tol, eq.window);
        const Matrix rho_c = canonical_state(model.params.system_hamiltonian(), model.params.beta);
        row.theta = noncanonical_angle(rep.rho_eq, rho_c).theta;
        row.settled_at = rep.settled_at;
        row.residual = rep.residual;
    } catch (const NotSettled& e) {
        row.settled = false;
        row.residual = e.residual();
        row.theta = std::nan("");
    }
    return row;
}

std::vector<io::SweepRow> run_sweep(const PipelineConfig& cfg, int jobs) {
    cfg.validate();
    std::vector<ModelSpec> points;
    for (double lambda : cfg.sweep_lambdas) {
        ModelSpec m = cfg.model;
        m.params.lambda = lambda;
        points.push_back(m);
    }
    for (double temperature : cfg.sweep_temperatures) {
        if (!(temperature > 0.0)) {
            throw ValidationError("sweep temperatures must be positive");
        }
        ModelSpec m = cfg.model;
        m.params.beta = 1.0 / temperature;
        points.push_back(m);
    }
    const Matrix rho0 = cfg.initial.size() == 0 ? initial_state("e11", 2) : cfg.initial;
    const TimeGrid learn_grid(cfg.dt, cfg.learn_steps);

    std::vector<io::SweepRow> rows(points.size());
    std::vector<std::exception_ptr> errors(points.size());
    const bool outer = jobs > 1 && points.size() > 1;
    const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(dynamic) num_threads(jobs) if (outer)
    for (std::ptrdiff_t p = 0; p < n; ++p) {
        try {
            ModelSpec m = points[static_cast<std::size_t>(p)];
            if (outer) {
                m.heom.exec = kernels::Exec::serial;
            }
            const auto traj = generate(m, learn_grid);
            const auto tensors = learn(traj, cfg.cutoff);
            const auto prop = propagate(tensors, rho0, cfg.total_steps, cfg.equilibrium,
                                        outer ? kernels::Exec::serial : kernels::Exec::parallel);
            rows[static_cast<std::size_t>(p)] = analyze(prop, cfg.equilibrium);
        } catch (...) {
            errors[static_cast<std::size_t>(p)] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return rows;
}

Matrix initial_state(const std::string& spec, Eigen::Index dim) {
    if (spec.size() == 3 && spec[0] == 'e' && spec[1] == spec[2] && spec[1] >= '1' && spec[1] <= '9') {
        const Eigen::Index i = spec[1] - '1';
        if (i >= dim) {
            throw RangeError("initial state '" + spec + "' exceeds the system dimension");
        }
        Matrix m = Matrix::Zero(dim, dim);
        m(i, i) = 1.0;
        return m;
    }
    if (spec == "plus") {
        return Matrix::Constant(dim, dim, Complex(1.0 / static_cast<double>(dim), 0.0));
    }
    if (spec == "mixed") {
        return DensityMatrix::maximally_mixed(dim).matrix();
    }
    if (!std::filesystem::exists(spec)) {
        throw ValidationError("initial state must be e11, e22, ..., plus, mixed or an existing file; got '" + spec + "'");
    }
    const io::Json j = io::read_json(spec);
    Matrix m = j.is_object() && j.contains("state") ? io::matrix_from_json(j["state"], "state")
                                                    : io::matrix_from_json(j, "state");
    if (m.rows() != dim || m.cols() != dim) {
        throw DimensionError("initial state file dimension does not match");
    }
    return DensityMatrix(m).matrix();
}

namespace {

struct ModelFlags {
    std::string model = "heom";
    std::string units = "dimensionless";
    double reference_cm = 0.0;
    double dt = 0.1;
    double omega0 = 1.0;
    double j = 1.0;
    double lambda = 0.1;
    double gamma = 1.0;
    std::optional<double> beta;
    std::optional<double> temperature;
    std::string coupling = "z";
    int heom_depth = 6;
    int heom_matsubara = 1;
    double heom_dt = 0.005;
    double damping_rate = 0.1;
    double dephasing_rate = 0.0;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
    cmd->add_option("--model", f.model, "unitary | lindblad | dephasing | heom")->capture_default_str();
    cmd->add_option("--units", f.units, "dimensionless | wavenumber")->capture_default_str();
    cmd->add_option("--reference-cm", f.reference_cm, "reference energy J in cm^-1 (wavenumber units)");
    cmd->add_option("--dt", f.dt, "time step (fs in wavenumber units)")->capture_default_str();
    cmd->add_option("--omega0", f.omega0, "bare level splitting")->capture_default_str();
    cmd->add_option("--j", f.j, "tunnelling splitting")->capture_default_str();
    cmd->add_option("--lambda", f.lambda, "bath reorganization energy")->capture_default_str();
    cmd->add_option("--gamma", f.gamma, "bath cutoff frequency")->capture_default_str();
    cmd->add_option("--beta", f.beta, "inverse temperature (default 0.5)");
    cmd->add_option("--temperature", f.temperature, "k_B T (Kelvin in wavenumber units)");
    cmd->add_option("--coupling", f.coupling, "system coupling operator: x | y | z")->capture_default_str();
    cmd->add_option("--heom-depth", f.heom_depth)->capture_default_str();
    cmd->add_option("--heom-matsubara", f.heom_matsubara)->capture_default_str();
    cmd->add_option("--heom-dt", f.heom_dt, "HEOM integrator step")->capture_default_str();
    cmd->add_option("--damping-rate", f.damping_rate, "Lindblad sigma_- rate")->capture_default_str();
    cmd->add_option("--dephasing-rate", f.dephasing_rate, "Lindblad sigma_z rate")->capture_default_str();
}

struct Converter {
    std::optional<units::EnergyScale> scale;

    explicit Converter(const ModelFlags& f) {
        if (f.units == "wavenumber") {
            scale.emplace(f.reference_cm);
        } else if (f.units != "dimensionless") {
            throw ValidationError("--units must be dimensionless or wavenumber");
        }
    }
    double energy(double x) const { return scale ? scale->energy(x) : x; }
    double time(double x) const { return scale ? scale->time_from_fs(x) : x; }
    double beta(double x) const { return scale ? x * scale->reference() : x; }
    /// k_B T in energy units from a temperature flag value.
    double temperature(double x) const {
        return scale ? 1.0 / scale->beta_from_kelvin(x) : x;
    }
};

ModelSpec model_from_flags(const ModelFlags& f, const Converter& c) {
    ModelSpec m;
    m.kind = model_kind_from_string(f.model);
    m.params.omega0 = c.energy(f.omega0);
    m.params.j_coupling = c.energy(f.j);
    m.params.lambda = c.energy(f.lambda);
    m.params.gamma = c.energy(f.gamma);
    if (f.beta && f.temperature) {
        throw ValidationError("give either --beta or --temperature, not both");
    }
    if (f.beta) {
        m.params.beta = c.beta(*f.beta);
    } else if (f.temperature) {
        m.params.beta = 1.0 / c.temperature(*f.temperature);
    }
    m.params.coupling_op = coupling_from_name(f.coupling);
    m.heom.depth = f.heom_depth;
    m.heom.n_matsubara = f.heom_matsubara;
    m.heom.integrator_dt = c.time(f.heom_dt);
    m.damping_rate = c.energy(f.damping_rate);
    m.dephasing_rate = c.energy(f.dephasing_rate);
    return m;
}

CutoffPolicy cutoff_from_flags(const std::optional<std::size_t>& k, const std::optional<double>& tol) {
    CutoffPolicy p;
    if (k && tol) {
        throw ValidationError("give either --cutoff-k or --cutoff-tol, not both");
    }
    p.fixed_k = k;
    if (tol) {
        p.tol = *tol;
    }
    return p;
}

int report_error(int code, const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    return code;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Transfer tensor learning, propagation and memory-kernel extraction"};
    app.require_subcommand(1);
    int jobs = 0;
    app.add_option("--jobs", jobs, "worker threads (0 = OpenMP default)");

    // generate
    ModelFlags gen_flags;
    std::size_t gen_steps = 50;
    std::string gen_out;
    std::optional<double> conv_tol = 1e-3;
    bool skip_check = false;
    auto* gen = app.add_subcommand("generate", "write basis trajectories from a reference model");
    add_model_flags(gen, gen_flags);
    gen->add_option("--steps,--learn-steps", gen_steps, "number of time steps")->capture_default_str();
    gen->add_option("--out", gen_out)->required();
    gen->add_option("--convergence-tol", conv_tol, "HEOM refinement tolerance")->capture_default_str();
    gen->add_flag("--skip-convergence-check", skip_check);

    // learn
    std::string learn_in, learn_out;
    std::optional<std::size_t> learn_steps, cutoff_k;
    std::optional<double> cutoff_tol;
    auto* lrn = app.add_subcommand("learn", "derive transfer tensors from basis trajectories");
    lrn->add_option("--in", learn_in)->required();
    lrn->add_option("--out", learn_out)->required();
    lrn->add_option("--learn-steps", learn_steps, "use only the first n steps");
    lrn->add_option("--cutoff-k", cutoff_k);
    lrn->add_option("--cutoff-tol", cutoff_tol, "default 1e-6");

    // propagate
    std::string prop_tensors, prop_initial = "e11", prop_out;
    std::size_t prop_steps = 0;
    EquilibriumOptions prop_eq;
    auto* prop = app.add_subcommand("propagate", "propagate an initial state with learned tensors");
    prop->add_option("--tensors", prop_tensors)->required();
    prop->add_option("--initial", prop_initial, "e11 | e22 | plus | mixed | file")->capture_default_str();
    prop->add_option("--steps", prop_steps)->required();
    prop->add_option("--out", prop_out)->required();
    prop->add_option("--eq-tol", prop_eq.tol)->capture_default_str();
    prop->add_option("--eq-window", prop_eq.window)->capture_default_str();

    // kernel
    std::string ker_tensors, ker_h, ker_out;
    std::vector<std::string> ker_elements;
    auto* ker = app.add_subcommand("kernel", "tabulate the memory kernel");
    ker->add_option("--tensors", ker_tensors)->required();
    ker->add_option("--hamiltonian", ker_h, "JSON file {\"hamiltonian\": matrix}");
    ker->add_option("--elements", ker_elements, "labels such as 11->22")->delimiter(',');
    ker->add_option("--out", ker_out)->required();

    // analyze
    std::vector<std::string> ana_in;
    std::vector<double> ana_lambdas, ana_temps;
    ModelFlags ana_flags;
    std::size_t ana_learn = 50, ana_total = 500;
    std::string ana_initial = "e11", ana_out;
    EquilibriumOptions ana_eq;
    auto* ana = app.add_subcommand("analyze", "non-canonical deviation angle of equilibrium states");
    ana->add_option("--in", ana_in, "propagated trajectory files");
    add_model_flags(ana, ana_flags);
    ana->add_option("--lambdas", ana_lambdas, "lambda sweep values")->delimiter(',');
    ana->add_option("--temps", ana_temps, "temperature sweep values (k_B T, or Kelvin)")->delimiter(',');
    ana->add_option("--learn-steps", ana_learn)->capture_default_str();
    ana->add_option("--steps", ana_total)->capture_default_str();
    ana->add_option("--cutoff-k", cutoff_k);
    ana->add_option("--cutoff-tol", cutoff_tol);
    ana->add_option("--initial", ana_initial)->capture_default_str();
    ana->add_option("--eq-tol", ana_eq.tol)->capture_default_str();
    ana->add_option("--eq-window", ana_eq.window)->capture_default_str();
    ana->add_option("--out", ana_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (jobs < 0) {
            throw ValidationError("--jobs must be non-negative");
        }
        if (jobs > 0) {
            omp_set_num_threads(jobs);
        }
        if (*gen) {
            const Converter conv(gen_flags);
            const ModelSpec model = model_from_flags(gen_flags, conv);
            const TimeGrid grid(conv.time(gen_flags.dt), gen_steps);
            const bool check = model.kind == ModelKind::heom && !skip_check;
            const auto file = generate(model, grid, check ? conv_tol : std::nullopt);
            io::write_json(gen_out, io::to_json(file));
            log("wrote " + std::to_string(file.set.dim() * file.set.dim()) + " basis trajectories to " + gen_out);
        } else if (*lrn) {
            const auto traj = io::trajectory_from_json(io::read_json(learn_in));
            const auto tensors = learn(traj, cutoff_from_flags(cutoff_k, cutoff_tol), learn_steps);
            io::write_json(learn_out, io::to_json(tensors));
            std::ostringstream s;
            s << "learned " << tensors.learned_count << " tensors, cutoff K=" << tensors.tensors.size();
            if (tensors.truncation_error) {
                s << ", ||T_{K+1}||=" << io::format_number(*tensors.truncation_error);
            }
            log(s.str());
        } else if (*prop) {
            const auto tensors = io::tensors_from_json(io::read_json(prop_tensors));
            const Matrix rho0 = initial_state(prop_initial, tensors.tensors.dim());
            const auto out = propagate(tensors, rho0, prop_steps, prop_eq);
            io::write_json(prop_out, io::to_json(out));
            log("summary: " + out.summary.dump());
        } else if (*ker) {
            const auto tensors = io::tensors_from_json(io::read_json(ker_tensors));
            std::optional<Matrix> h;
            if (!ker_h.empty()) {
                const io::Json j = io::read_json(ker_h);
                if (!j.is_object() || !j.contains("hamiltonian")) {
                    throw SchemaError("missing required field", "hamiltonian");
                }
                h = io::matrix_from_json(j["hamiltonian"], "hamiltonian");
            }
            std::vector<ElementLabel> labels;
            for (const auto& e : ker_elements) {
                labels.push_back(io::parse_element_label(e, tensors.tensors.dim()));
            }
            io::write_atomic(ker_out, io::format_kernel_table(kernel(tensors, h, labels)));
            log("wrote kernel table to " + ker_out);
        } else if (*ana) {
            std::vector<io::SweepRow> rows;
            if (!ana_in.empty()) {
                if (!ana_lambdas.empty() || !ana_temps.empty()) {
                    throw ValidationError("give either --in files or a --lambdas/--temps sweep, not both");
                }
                for (const auto& path : ana_in) {
                    rows.push_back(analyze(io::propagated_from_json(io::read_json(path)), ana_eq));
                }
            } else {
                const Converter conv(ana_flags);
                PipelineConfig cfg;
                cfg.model = model_from_flags(ana_flags, conv);
                cfg.dt = conv.time(ana_flags.dt);
                cfg.learn_steps = ana_learn;
                cfg.total_steps = ana_total;
                cfg.cutoff = cutoff_from_flags(cutoff_k, cutoff_tol);
                cfg.initial = initial_state(ana_initial, 2);
                cfg.equilibrium = ana_eq;
                for (double l : ana_lambdas) cfg.sweep_lambdas.push_back(conv.energy(l));
                for (double t : ana_temps) cfg.sweep_temperatures.push_back(conv.temperature(t));
                if (cfg.sweep_lambdas.empty() && cfg.sweep_temperatures.empty()) {
                    throw ValidationError("analyze needs --in files or a --lambdas/--temps sweep");
                }
                rows = run_sweep(cfg, jobs > 0 ? jobs : omp_get_max_threads());
            }
            io::write_atomic(ana_out, io::format_sweep_table(rows));
            for (const auto& r : rows) {
                if (!r.settled) {
                    log("point lambda=" + io::format_number(r.lambda) + " T=" + io::format_number(r.temperature) +
                        " did not settle (residual " + io::format_number(r.residual) + ")");
                }
            }
        }
    } catch (const InsufficientLearning& e) {
        std::ostringstream s;
        s << e.what() << "; tensor norms:";
        for (double v : e.tail_norms()) s << " " << io::format_number(v);
        return report_error(3, s.str());
    } catch (const NotConverged& e) {
        std::ostringstream s;
        s << e.what() << "\nper-element max deviation:\n" << e.report().element_deviation;
        return report_error(3, s.str());
    } catch (const DivergenceError& e) {
        return report_error(3, std::string(e.what()) + " (step " + std::to_string(e.step()) + ")");
    } catch (const NotSettled& e) {
        return report_error(3, e.what());
    } catch (const Error& e) {
        return report_error(2, e.what());
    } catch (const std::exception& e) {
        return report_error(1, e.what());
    }
    return 0;
}

}  // namespace ttm::pipeline

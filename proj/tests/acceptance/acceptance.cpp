// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "ttm/analysis.hpp"
#include "ttm/errors.hpp"
#include "ttm/generators.hpp"
#include "ttm/io.hpp"
#include "ttm/nz_kernel.hpp"
#include "ttm/transfer_tensor.hpp"

using namespace ttm;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Two-level benchmark used for the crossover and equilibrium runs:
// omega0 = J = 1, sigma_z coupling.
SpinBosonParams benchmark_tls(double lambda, double gamma, double beta) {
    SpinBosonParams p;
    p.omega0 = 1.0;
    p.j_coupling = 1.0;
    p.lambda = lambda;
    p.gamma = gamma;
    p.beta = beta;
    p.coupling_op = pauli::z();
    return p;
}

// Symmetric TLS H = sigma_z (Omega = 1 as the level splitting scale), coupled through sigma_x.
SpinBosonParams symmetric_tls(double lambda) {
    SpinBosonParams p;
    p.omega0 = 2.0;
    p.j_coupling = 0.0;
    p.lambda = lambda;
    p.gamma = 0.05;
    p.beta = 4.79;
    p.coupling_op = pauli::x();
    return p;
}

Matrix ground_projector() {
    Matrix rho = Matrix::Zero(2, 2);
    rho(0, 0) = 1.0;
    return rho;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
    const TimeGrid grid(0.1, 50);
    const Matrix h = 0.7 * pauli::x() + 0.4 * pauli::z();
    double worst = 0.0;
    double slowest = 0.0;
    auto check = [&](const BasisTrajectorySet& set, std::chrono::steady_clock::time_point t0) {
        const auto tensors = maps_to_tensors(extract_maps(set));
        for (std::size_t s = 2; s <= tensors.size(); ++s) worst = std::max(worst, superop_norm(tensors.tensor(s)));
        slowest = std::max(slowest, seconds_since(t0));
    };
    auto t0 = std::chrono::steady_clock::now();
    check(gen_unitary(h, grid), t0);
    t0 = std::chrono::steady_clock::now();
    check(gen_lindblad(h, {pauli::minus(), pauli::z()}, {0.3, 0.1}, grid), t0);
    return {worst < 1e-8 && slowest < 1.0,
            "max ||T_s>=2|| = " + fmt("%.3g", worst) + ", slowest run " + fmt("%.3f", slowest) + " s"};
}

Outcome criterion2() {
    const auto t0 = std::chrono::steady_clock::now();
    const TimeGrid grid(0.1, 1);
    const auto tensors = maps_to_tensors(extract_maps(gen_unitary(pauli::x(), grid)));
    const auto traj = propagate(tensors, 1, ground_projector(), 1000);
    double err = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double c = std::cos(grid.dt * static_cast<double>(k));
        err = std::max(err, std::abs(traj[k](0, 0) - c * c));
    }
    const double elapsed = seconds_since(t0);
    return {err < 1e-6 && elapsed < 1.0, "max |rho00 - cos^2 t| = " + fmt("%.3g", err) + " in " + fmt("%.3f", elapsed) + " s"};
}

Outcome criterion3() {
    double map_err = 0.0, kernel_err = 0.0;
    for (int seed = 0; seed < 20; ++seed) {
        for (Eigen::Index d : {2, 3}) {
            std::mt19937_64 rng(1000 + seed);
            const Eigen::Index n = d * d;
            const std::size_t steps = 12;
            std::vector<SuperOperator> maps{SuperOperator::identity(d)};
            for (std::size_t k = 1; k <= steps; ++k) {
                const Matrix m = Matrix::Identity(n, n) * 0.9 + oracle::random_matrix(rng, n, n, 0.5 / static_cast<double>(n));
                maps.emplace_back(m, SuperOpKind::map);
            }
            const DynamicalMapSequence seq(TimeGrid(0.1, steps), maps);
            const auto back = tensors_to_maps(maps_to_tensors(seq), steps);
            for (std::size_t k = 0; k <= steps; ++k) map_err = std::max(map_err, max_abs(back[k].matrix() - seq[k].matrix()));

            KernelSequence ks;
            ks.dt = 0.1;
            ks.liouvillian = liouvillian_superop(oracle::random_hermitian(rng, d));
            for (std::size_t s = 0; s < steps; ++s) ks.kernels.emplace_back(oracle::random_matrix(rng, n, n), SuperOpKind::kernel);
            const auto round = extract_kernel(kernel_to_tensors(ks), ks.liouvillian);
            for (std::size_t s = 1; s <= steps; ++s)
                kernel_err = std::max(kernel_err, max_abs(round.kernel(s).matrix() - ks.kernel(s).matrix()));
        }
    }
    return {map_err < 1e-10 && kernel_err < 1e-10,
            "map roundtrip " + fmt("%.3g", map_err) + ", kernel roundtrip " + fmt("%.3g", kernel_err)};
}

// Shared by criteria 4, 5 and 8.
struct CrossoverRun {
    double lambda;
    std::vector<SuperOperator> reference;  // HEOM maps E_0..E_total
    TransferTensorSequence tensors;        // all tensors of the learning window
};

constexpr double kCrossDt = 0.1;
constexpr std::size_t kCrossLearn = 50;   // 5 / gamma
constexpr std::size_t kCrossTotal = 550;  // 10 windows beyond the learning period

std::vector<CrossoverRun>& crossover_runs() {
    static std::vector<CrossoverRun> runs = [] {
        std::vector<CrossoverRun> out;
        HeomConfig cfg;
        cfg.depth = 6;
        cfg.n_matsubara = 1;
        cfg.integrator_dt = 0.01;
        for (double lambda : {0.01, 0.1, 0.5, 2.0}) {
            const auto set = gen_heom(benchmark_tls(lambda, 1.0, 0.5), cfg, TimeGrid(kCrossDt, kCrossTotal));
            const auto maps = extract_maps(set);
            out.push_back({lambda, maps.maps(), maps_to_tensors(extract_maps(set.truncated(kCrossLearn)))});
        }
        return out;
    }();
    return runs;
}

double prediction_error(const CrossoverRun& run, std::size_t k) {
    const auto predicted = tensors_to_maps(run.tensors.truncated(k), kCrossTotal);
    double err = 0.0;
    for (std::size_t n = 0; n <= kCrossTotal; ++n) err = std::max(err, max_abs(predicted[n].matrix() - run.reference[n].matrix()));
    return err;
}

Outcome criterion4() {
    bool ok = true;
    std::string detail;
    for (const auto& run : crossover_runs()) {
        const double err = prediction_error(run, kCrossLearn - 1);
        ok = ok && err <= 5e-3;
        detail += "lambda=" + fmt("%g", run.lambda) + ": " + fmt("%.2e", err) + "  ";
    }
    return {ok, "max map error over 550 steps: " + detail};
}

Outcome criterion5() {
    std::string detail;
    std::vector<std::size_t> changes;
    for (const auto& run : crossover_runs()) {
        const auto traj = propagate(run.tensors, kCrossLearn - 1, ground_projector(), 5000);
        std::vector<double> pop;
        for (const auto& r : traj) pop.push_back((r(0, 0) - r(1, 1)).real());
        const auto m = oscillation_metrics(pop, kCrossDt);
        changes.push_back(m.sign_changes);
        detail += "lambda=" + fmt("%g", run.lambda) + ": " + std::to_string(m.sign_changes) + "  ";
    }
    return {changes.front() >= 3 && changes.back() <= 1, "sign changes of rho00 - rho11: " + detail};
}

// Equilibrium angle for one point of the Fig. 3 style sweep.
double equilibrium_theta(double lambda, double beta) {
    const auto p = benchmark_tls(lambda, 5.0, beta);
    HeomConfig cfg;
    cfg.depth = 14;
    cfg.n_matsubara = 2;
    cfg.integrator_dt = 0.005;
    const double dt = 0.05;
    const std::size_t learn = 40;
    const auto tensors = maps_to_tensors(extract_maps(gen_heom(p, cfg, TimeGrid(dt, learn))));
    const auto traj = propagate(tensors, learn - 1, ground_projector(), 30000);
    const auto eq = detect_equilibrium(traj, 1e-6, 50);
    return noncanonical_angle(eq.rho_eq, canonical_state(p.system_hamiltonian(), beta)).theta;
}

Outcome criterion6() {
    std::string detail = "theta(lambda) at kT=2:";
    std::vector<double> by_lambda;
    for (double lambda : {0.05, 0.2, 1.0, 3.0, 8.0}) {
        by_lambda.push_back(equilibrium_theta(lambda, 0.5));
        detail += " " + fmt("%.4f", by_lambda.back());
    }
    detail += "; theta(kT) at lambda=1, kT=1,2,4,8:";
    std::vector<double> by_temp;
    for (double kt : {1.0, 2.0, 4.0, 8.0}) {
        by_temp.push_back(equilibrium_theta(1.0, 1.0 / kt));
        detail += " " + fmt("%.4f", by_temp.back());
    }
    bool ok = true;
    for (std::size_t i = 1; i < by_lambda.size(); ++i) ok = ok && by_lambda[i] >= by_lambda[i - 1];
    for (std::size_t i = 1; i < by_temp.size(); ++i) ok = ok && by_temp[i] <= by_temp[i - 1];
    const double plateau = by_lambda.back();
    ok = ok && std::abs(plateau - M_PI / 4) <= 0.15 * M_PI / 4;
    return {ok, detail};
}

// Kernel sequence of the symmetric TLS.
KernelSequence symmetric_kernel(double lambda, double dt, std::size_t n, int depth, int n_matsubara) {
    const auto p = symmetric_tls(lambda);
    HeomConfig cfg;
    cfg.depth = depth;
    cfg.n_matsubara = n_matsubara;
    cfg.integrator_dt = 0.01;
    const auto tensors = maps_to_tensors(extract_maps(gen_heom(p, cfg, TimeGrid(dt, n))));
    return extract_kernel(tensors, liouvillian_superop(p.system_hamiltonian()));
}

Outcome criterion7() {
    const double dt = 0.1;
    const auto k = symmetric_kernel(0.25, dt, 100, 10, 1);
    using L = ElementLabel;
    // pairs (a, b, sign) with K_a = sign * K_b, for s >= 2
    struct Rel {
        L a, b;
        double sign;
        const char* name;
    };
    const std::vector<Rel> rels{
        {{{0, 0}, {0, 0}}, {{0, 0}, {1, 1}}, -1.0, "11->11=-11->22"},
        {{{1, 1}, {1, 1}}, {{1, 1}, {0, 0}}, -1.0, "22->22=-22->11"},
        {{{0, 1}, {1, 0}}, {{1, 0}, {1, 0}}, -1.0, "12->21=-21->21"},
        {{{0, 1}, {1, 0}}, {{0, 1}, {0, 1}}, -1.0, "12->21=-12->12"},
        {{{0, 1}, {1, 0}}, {{1, 0}, {0, 1}}, 1.0, "12->21=21->12"},
    };
    bool sym_ok = true;
    std::string detail = "symmetry rel. deviation (s>=2):";
    for (const auto& r : rels) {
        double diff = 0.0, scale = 0.0;
        for (std::size_t s = 2; s <= k.kernels.size(); ++s) {
            const double a = k.kernel(s).element(r.a.from, r.a.to).real();
            const double b = k.kernel(s).element(r.b.from, r.b.to).real();
            diff = std::max(diff, std::abs(a - r.sign * b));
            scale = std::max(scale, std::abs(a));
        }
        const double rel = diff / scale;
        sym_ok = sym_ok && rel < 1e-6;
        detail += std::string(" ") + r.name + " " + fmt("%.2e", rel);
    }

    // Weak coupling: dominant elements against the second-order kernel.
    bool born_ok = true;
    detail += "; Born oracle max rel. error on dominant elements:";
    for (double lambda : {0.05, 0.01}) {
        const auto p = symmetric_tls(lambda);
        const auto kw = symmetric_kernel(lambda, dt, 40, 10, 2);
        const oracle::BathParams bath{p.lambda, p.gamma, p.beta};
        std::vector<Matrix> born;
        for (int s = 3; s <= 40; ++s)
            born.push_back(oracle::born_tensor(p.system_hamiltonian(), p.coupling_op, bath, dt, s) / (dt * dt));
        Eigen::MatrixXd peak = Eigen::MatrixXd::Zero(4, 4), err = Eigen::MatrixXd::Zero(4, 4);
        for (int s = 3; s <= 40; ++s) {
            const Matrix& b = born[static_cast<std::size_t>(s - 3)];
            peak = peak.cwiseMax(b.cwiseAbs());
            err = err.cwiseMax((kw.kernel(static_cast<std::size_t>(s)).matrix() - b).cwiseAbs());
        }
        double worst = 0.0;
        for (Eigen::Index i = 0; i < 4; ++i)
            for (Eigen::Index j = 0; j < 4; ++j)
                if (peak(i, j) >= 0.1 * peak.maxCoeff()) worst = std::max(worst, err(i, j) / peak(i, j));
        born_ok = born_ok && worst < 0.10;
        detail += " lambda=" + fmt("%g", lambda) + " " + fmt("%.3f", worst);
    }
    return {sym_ok && born_ok, detail};
}

Outcome criterion8() {
    bool ok = true;
    std::string detail;
    for (const auto& run : crossover_runs()) {
        detail += "lambda=" + fmt("%g", run.lambda) + ":";
        for (std::size_t k : {20, 30, 40, 44}) {
            const double e0 = prediction_error(run, k);
            const double e5 = prediction_error(run, k + 5);
            ok = ok && e5 <= e0;
            detail += " K" + std::to_string(k) + " " + fmt("%.1e", e0) + "->" + fmt("%.1e", e5) + " (||T_K+1||=" +
                      fmt("%.1e", superop_norm(run.tensors.tensor(k + 1))) + ")";
        }
        detail += "  ";
    }
    return {ok, detail};
}

Outcome criterion9() {
    bool ok = true;
    std::string detail;
    for (auto [k, d] : std::vector<std::pair<std::size_t, Eigen::Index>>{{5, 2}, {10, 2}, {5, 3}}) {
        std::mt19937_64 rng(7);
        const auto set = gen_unitary(oracle::random_hermitian(rng, d), TimeGrid(0.1, k));
        io::TensorFile f;
        f.tensors = maps_to_tensors(extract_maps(set));
        f.learned_count = k;
        f.cutoff_policy = "fixed";
        const auto j = io::Json::parse(io::to_json(f).dump());
        std::size_t entries = 0;
        for (const auto& t : j["tensors"])
            for (const auto& row : t) entries += row.size();
        const auto expected = k * static_cast<std::size_t>(d * d * d * d);
        ok = ok && entries == expected && f.tensors.complex_count() == expected;
        detail += "(K=" + std::to_string(k) + ",D=" + std::to_string(d) + "): " + std::to_string(entries) + "  ";
    }
    return {ok, "complex entries in tensor payload " + detail};
}

Outcome criterion10() {
    SpinBosonParams p;
    p.omega0 = 1.0;
    p.j_coupling = 0.0;
    p.lambda = 0.1;
    p.gamma = 1.0;
    p.beta = 1.0;
    p.coupling_op = pauli::z();
    const double dt = 0.1;
    const std::size_t learn = 50, total = 500;
    const auto exact = gen_dephasing_analytic(p, TimeGrid(dt, total));
    const auto tensors = maps_to_tensors(extract_maps(exact.truncated(learn)));
    const Matrix plus = Matrix::Constant(2, 2, 0.5);
    const auto traj = propagate(tensors, learn, plus, total);
    const auto ref = exact.evolve(plus);
    double err = 0.0;
    for (std::size_t k = 0; k <= total; ++k) err = std::max(err, std::abs(traj[k](0, 1) - ref[k](0, 1)));
    return {err < 1e-4, "max coherence error over 10 learning windows: " + fmt("%.3g", err)};
}

}  // namespace

int main() {
    const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                         criterion6, criterion7, criterion8, criterion9, criterion10};
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("criterion %zu: %s  %s  [%.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}

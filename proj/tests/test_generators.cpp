#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "ttm/errors.hpp"
#include "ttm/generators.hpp"
#include "ttm/heom.hpp"

using namespace ttm;

namespace {

double max_frame_diff(const BasisTrajectorySet& a, const BasisTrajectorySet& b) {
    double worst = 0.0;
    for (std::size_t t = 0; t < a.frames().size(); ++t)
        for (std::size_t k = 0; k < a.grid().n_frames(); ++k)
            worst = std::max(worst, (a.frames()[t][k] - b.frames()[t][k]).cwiseAbs().maxCoeff());
    return worst;
}

SpinBosonParams dephasing_params(double lambda) {
    SpinBosonParams p;
    p.omega0 = 1.0;
    p.j_coupling = 0.0;
    p.lambda = lambda;
    p.gamma = 1.0;
    p.beta = 1.0;
    p.coupling_op = pauli::z();
    return p;
}

}  // namespace

TEST_CASE("TimeGrid validation") {
    CHECK_THROWS_AS(TimeGrid(0.0, 5), ValidationError);
    CHECK_THROWS_AS(TimeGrid(0.1, 0), ValidationError);
    const TimeGrid g(0.1, 10);
    CHECK(g.n_frames() == 11);
    CHECK(g.time(10) == doctest::Approx(1.0));
}

TEST_CASE("gen_unitary Rabi oscillation") {
    const auto set = gen_unitary(pauli::x(), TimeGrid(0.1, 100));
    set.validate();
    for (std::size_t k = 0; k <= 100; ++k) {
        const double t = 0.1 * static_cast<double>(k);
        CHECK(std::abs(set.frame(0, 0, k)(0, 0) - std::cos(t) * std::cos(t)) < 1e-12);
    }
    const auto z = gen_unitary(pauli::z(), TimeGrid(0.1, 30));
    for (std::size_t k = 0; k <= 30; ++k) {
        const double t = 0.1 * static_cast<double>(k);
        CHECK(std::abs(z.frame(0, 1, k)(0, 1) - std::exp(Complex(0, -2 * t))) < 1e-12);
    }
}

TEST_CASE("trajectory set evolve is linear in the initial state") {
    std::mt19937_64 rng(31);
    const auto set = gen_unitary(oracle::random_hermitian(rng, 3), TimeGrid(0.2, 10));
    const Matrix a = oracle::random_density(rng, 3);
    const Matrix b = oracle::random_density(rng, 3);
    const auto ea = set.evolve(a);
    const auto eb = set.evolve(b);
    const auto eab = set.evolve(0.3 * a + 0.7 * b);
    for (std::size_t k = 0; k < ea.size(); ++k)
        CHECK((eab[k] - 0.3 * ea[k] - 0.7 * eb[k]).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(set.truncated(11), RangeError);
    CHECK(set.truncated(4).grid().n_steps == 4);
}

TEST_CASE("gen_lindblad matches the dense generator exponential") {
    std::mt19937_64 rng(32);
    const Matrix h = oracle::random_hermitian(rng, 2);
    const std::vector<Matrix> jumps{pauli::minus(), pauli::z()};
    const std::vector<double> rates{0.3, 0.1};
    const TimeGrid grid(0.1, 40);
    const auto set = gen_lindblad(h, jumps, rates, grid);
    const Matrix l = oracle::lindblad_superop(h, jumps, rates);
    const Matrix rho0 = oracle::random_density(rng, 2);
    const auto traj = set.evolve(rho0);
    for (std::size_t k = 0; k <= grid.n_steps; ++k) {
        const Matrix expected = oracle::unvec((grid.time(k) * l).exp() * oracle::vec(rho0), 2);
        CHECK((traj[k] - expected).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("gen_lindblad special cases") {
    const TimeGrid grid(0.1, 20);
    const auto zero_rate = gen_lindblad(pauli::x(), {pauli::minus()}, {0.0}, grid);
    CHECK(max_frame_diff(zero_rate, gen_unitary(pauli::x(), grid)) < 1e-8);

    // Pure amplitude damping: the excited population decays as exp(-r t).
    const auto damped = gen_lindblad(Matrix::Zero(2, 2), {pauli::minus()}, {0.5}, grid);
    for (std::size_t k = 0; k <= grid.n_steps; ++k)
        CHECK(std::abs(damped.frame(1, 1, k)(1, 1).real() - std::exp(-0.5 * grid.time(k))) < 1e-9);

    // Pure Lindblad dephasing with A = sigma_z: r (Z rho Z - rho) damps coherences at rate 2r.
    const auto dephased = gen_lindblad(Matrix::Zero(2, 2), {pauli::z()}, {0.25}, grid);
    for (std::size_t k = 0; k <= grid.n_steps; ++k)
        CHECK(std::abs(dephased.frame(0, 1, k)(0, 1) - std::exp(-0.5 * grid.time(k))) < 1e-9);

    CHECK_THROWS_AS(gen_lindblad(pauli::x(), {pauli::minus()}, {-0.1}, grid), ValidationError);
}

TEST_CASE("dephasing lineshape edge cases and frozen value") {
    CHECK(dephasing_lineshape(0.0, 1.0, 1.0, 3.0) == Complex(0.0));
    CHECK(dephasing_lineshape(0.1, 1.0, 1.0, 0.0) == Complex(0.0));
    // 4 Re g(5) for lambda = 0.1, gamma = 1, beta = 1; computed independently with
    // mpmath oscillatory quadrature of (1/pi) int J(w)/w^2 coth(w/2) (1 - cos 5w) dw.
    const double gamma5 = 4.0 * dephasing_lineshape(0.1, 1.0, 1.0, 5.0).real();
    CHECK(gamma5 == doctest::Approx(3.2648110619677976).epsilon(1e-8));
}

TEST_CASE("dephasing lineshape second derivative is the bath correlation") {
    const oracle::BathParams bath{0.3, 1.5, 0.8};
    const double h = 1e-3;
    for (double t : {0.2, 1.0, 3.0}) {
        const Complex gm = dephasing_lineshape(bath.lambda, bath.gamma, bath.beta, t - h);
        const Complex g0 = dephasing_lineshape(bath.lambda, bath.gamma, bath.beta, t);
        const Complex gp = dephasing_lineshape(bath.lambda, bath.gamma, bath.beta, t + h);
        const Complex second = (gp - 2.0 * g0 + gm) / (h * h);
        const Complex c = oracle::bath_correlation(bath, t);
        CHECK(std::abs(second - c) < 1e-4 * std::max(1.0, std::abs(c)));
    }
}

TEST_CASE("gen_dephasing_analytic coherence decay") {
    const auto p = dephasing_params(0.1);
    const auto set = gen_dephasing_analytic(p, TimeGrid(0.5, 10));
    set.validate(1e-12);
    const Complex c = set.frame(0, 1, 10)(0, 1);
    const Complex expected = std::exp(Complex(0.0, -5.0) - 3.2648110619677976);
    CHECK(std::abs(c - expected) < 1e-9);
    // populations are untouched
    CHECK(std::abs(set.frame(0, 0, 10)(0, 0) - 1.0) < 1e-14);

    const auto free = gen_dephasing_analytic(dephasing_params(0.0), TimeGrid(0.1, 20));
    CHECK(max_frame_diff(free, gen_unitary(p.system_hamiltonian(), TimeGrid(0.1, 20))) < 1e-12);

    auto bad = p;
    bad.j_coupling = 0.5;
    CHECK_THROWS_AS(gen_dephasing_analytic(bad, TimeGrid(0.1, 5)), ConfigurationError);
}

TEST_CASE("HEOM bath exponents reproduce the correlation function") {
    const oracle::BathParams bath{0.4, 2.0, 0.7};
    const auto exps = heom::drude_lorentz_exponents(bath.lambda, bath.gamma, bath.beta, 200);
    for (double t : {0.1, 0.5, 2.0}) {
        Complex sum = 0.0;
        for (const auto& e : exps) sum += e.c * std::exp(-e.nu * t);
        CHECK(std::abs(sum - oracle::bath_correlation(bath, t)) < 1e-4);
    }
    CHECK(exps[0].nu == doctest::Approx(bath.gamma));
    CHECK(exps[1].nu == doctest::Approx(2.0 * M_PI / bath.beta));
}

TEST_CASE("HierarchyIndex counts and links nodes") {
    const heom::HierarchyIndex idx(3, 4);
    CHECK(idx.size() == 35);  // C(4 + 3, 3)
    for (std::size_t n = 0; n < idx.size(); ++n) {
        for (int k = 0; k < 3; ++k) {
            const long up = idx.raise(n, k);
            if (up >= 0) CHECK(idx.lower(static_cast<std::size_t>(up), k) == static_cast<long>(n));
        }
    }
    CHECK(idx.lower(0, 0) == -1);
}

TEST_CASE("HEOM at vanishing coupling is unitary") {
    SpinBosonParams p;
    p.omega0 = 1.0;
    p.j_coupling = 1.0;
    p.lambda = 1e-8;
    p.gamma = 1.0;
    p.beta = 0.5;
    HeomConfig cfg;
    cfg.depth = 2;
    cfg.integrator_dt = 0.01;
    const TimeGrid grid(0.1, 50);
    CHECK(max_frame_diff(gen_heom(p, cfg, grid), gen_unitary(p.system_hamiltonian(), grid)) < 1e-6);
}

TEST_CASE("HEOM reproduces the exact pure-dephasing solution") {
    const auto p = dephasing_params(0.1);
    HeomConfig cfg;
    cfg.depth = 6;
    cfg.n_matsubara = 6;
    cfg.integrator_dt = 0.01;
    const TimeGrid grid(0.1, 100);
    const auto heom = gen_heom(p, cfg, grid);
    heom.validate(1e-10);
    CHECK(max_frame_diff(heom, gen_dephasing_analytic(p, grid)) < 1e-4);
}

TEST_CASE("HEOM maps preserve trace and hermiticity") {
    SpinBosonParams p;
    p.lambda = 0.5;
    p.beta = 0.5;
    HeomConfig cfg;
    cfg.integrator_dt = 0.01;
    const auto set = gen_heom(p, cfg, TimeGrid(0.1, 40));
    set.validate(1e-10);
    std::mt19937_64 rng(33);
    const auto traj = set.evolve(oracle::random_density(rng, 2));
    for (const auto& r : traj) {
        CHECK(std::abs(r.trace() - 1.0) < 1e-10);
        CHECK((r - r.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("heom_converged detects unconverged hierarchies") {
    SpinBosonParams weak;
    weak.lambda = 1e-8;
    HeomConfig shallow;
    shallow.depth = 1;
    shallow.integrator_dt = 0.01;
    CHECK(heom_converged(weak, shallow, TimeGrid(0.1, 20), 1e-6).converged);

    SpinBosonParams strong;
    strong.lambda = 2.0;
    HeomConfig two;
    two.depth = 2;
    two.integrator_dt = 0.01;
    const auto report = heom_converged(strong, two, TimeGrid(0.1, 20), 1e-4);
    CHECK_FALSE(report.converged);
    CHECK(report.refined.depth == 4);
    CHECK(report.refined.n_matsubara == 2);
    CHECK(report.element_deviation.maxCoeff() == report.max_deviation);
}

TEST_CASE("model parameter validation") {
    SpinBosonParams p;
    p.lambda = -1.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p.lambda = 0.1;
    p.gamma = 0.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    HeomConfig cfg;
    cfg.depth = 0;
    CHECK_THROWS(cfg.validate(0.1));
}

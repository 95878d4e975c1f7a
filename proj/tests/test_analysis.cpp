#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "ttm/analysis.hpp"
#include "ttm/errors.hpp"
#include "ttm/transfer_tensor.hpp"

using namespace ttm;

namespace {

Matrix su2(std::mt19937_64& rng) {
    Matrix u = oracle::random_unitary(rng, 2);
    return u / std::sqrt(u.determinant());
}

}  // namespace

TEST_CASE("canonical_state examples") {
    const Matrix hot = canonical_state(pauli::z(), 1e-8);
    CHECK((hot - DensityMatrix::maximally_mixed(2).matrix()).cwiseAbs().maxCoeff() < 1e-6);

    const Matrix rho = canonical_state(pauli::z(), 1.0);
    const double z = std::exp(-1.0) + std::exp(1.0);
    CHECK(rho(0, 0).real() == doctest::Approx(std::exp(-1.0) / z).epsilon(1e-14));
    CHECK(rho(1, 1).real() == doctest::Approx(std::exp(1.0) / z).epsilon(1e-14));
    CHECK(std::abs(rho(0, 1)) < 1e-15);
    // no overflow at very low temperature
    const Matrix cold = canonical_state(pauli::z(), 1e4);
    CHECK(std::abs(cold(1, 1) - 1.0) < 1e-14);

    CHECK_THROWS_AS(canonical_state(pauli::z(), 0.0), ValidationError);
    CHECK_THROWS_AS(canonical_state(Matrix(Matrix::Ones(2, 2) + Complex(0, 1) * pauli::x()), 1.0), ValidationError);
}

TEST_CASE("noncanonical_angle examples") {
    const Matrix rz = canonical_state(pauli::z(), 1.0);
    const Matrix rx = canonical_state(pauli::x(), 1.0);
    CHECK(noncanonical_angle(rz, rz).theta == doctest::Approx(0.0));
    CHECK(noncanonical_angle(rz, rx).theta == doctest::Approx(M_PI / 2).epsilon(1e-12));
    CHECK_THROWS_AS(noncanonical_angle(DensityMatrix::maximally_mixed(2).matrix(), rz), DegenerateState);

    const Matrix tilted = canonical_state(Matrix((pauli::x() + pauli::z()) / std::sqrt(2.0)), 1.0);
    CHECK(noncanonical_angle(tilted, rz).theta == doctest::Approx(M_PI / 4).epsilon(1e-12));
}

TEST_CASE("noncanonical_angle is invariant under a common rotation and symmetric") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix a = oracle::random_density(rng, 2);
        const Matrix b = oracle::random_density(rng, 2);
        const Matrix u = su2(rng);
        const double theta = noncanonical_angle(a, b).theta;
        CHECK(theta >= 0.0);
        CHECK(theta <= M_PI / 2 + 1e-15);
        CHECK(noncanonical_angle(b, a).theta == doctest::Approx(theta).epsilon(1e-12));
        const Matrix ua = u * a * u.adjoint();
        const Matrix ub = u * b * u.adjoint();
        CHECK(noncanonical_angle(ua, ub).theta == doctest::Approx(theta).epsilon(1e-10));
    }
}

TEST_CASE("detect_equilibrium cases") {
    const Matrix rho = canonical_state(pauli::z(), 0.7);
    const std::vector<Matrix> constant(30, rho);
    const auto rep = detect_equilibrium(constant, 1e-9, 10);
    CHECK(rep.settled_at == 0);
    CHECK(rep.residual == 0.0);
    CHECK((rep.rho_eq - rho).norm() < 1e-15);

    const auto rabi = gen_unitary(pauli::x(), TimeGrid(0.1, 300)).trajectory(0, 0);
    CHECK_THROWS_AS(detect_equilibrium(rabi, 1e-6, 20), NotSettled);
    CHECK_THROWS_AS(detect_equilibrium(constant, 1e-6, 40), NotSettled);
    CHECK_THROWS_AS(detect_equilibrium(constant, 1e-6, 1), ValidationError);

    // relaxation exp(-t) towards rho: settles once the window range drops below tol
    std::vector<Matrix> relax;
    for (int k = 0; k < 400; ++k) relax.push_back(rho + std::exp(-0.1 * k) * (pauli::x() * 0.1));
    const auto r = detect_equilibrium(relax, 1e-6, 20);
    CHECK(r.residual < 1e-6);
    // first window [m, m+20) with range below tol: 0.1 e^{-0.1 m}(1 - e^{-1.9}) < 1e-6
    const double m = std::ceil(-10.0 * std::log(1e-5 / (1.0 - std::exp(-1.9))));
    CHECK(static_cast<double>(r.settled_at) == doctest::Approx(m).epsilon(0.02));
}

TEST_CASE("oscillation_metrics on synthetic series") {
    std::vector<double> damped;
    const double dt = 0.05;
    for (int k = 0; k < 2000; ++k) {
        const double t = dt * k;
        damped.push_back(std::cos(t) * std::exp(-0.1 * t));
    }
    const auto m = oscillation_metrics(damped, dt, 0.0);
    // cos crosses zero at pi/2 + n pi; 2000 * 0.05 = 100 -> 32 crossings, the last few
    // fall under the 1e-3 floor (e^{-0.1 t} < 1e-3 for t > 69)
    CHECK(m.sign_changes >= 20);
    CHECK(m.sign_changes <= 32);
    REQUIRE(m.envelope_decay_rate.has_value());
    CHECK(*m.envelope_decay_rate == doctest::Approx(0.1).epsilon(0.02));

    std::vector<double> monotone;
    for (int k = 0; k < 500; ++k) monotone.push_back(std::exp(-dt * k));
    const auto mm = oscillation_metrics(monotone, dt);
    CHECK(mm.sign_changes == 0);
    CHECK_FALSE(mm.envelope_decay_rate.has_value());
    CHECK(mm.asymptote == doctest::Approx(std::exp(-dt * 475)).epsilon(0.1));

    const std::vector<double> flat(50, 0.3);
    CHECK(oscillation_metrics(flat).sign_changes == 0);
    CHECK_THROWS_AS(oscillation_metrics(std::vector<double>(3, 0.0)), ValidationError);
}

TEST_CASE("TTM equilibrium matches a long HEOM run") {
    SpinBosonParams p;
    p.omega0 = 1.0;
    p.j_coupling = 1.0;
    p.lambda = 1.0;
    p.gamma = 1.0;
    p.beta = 0.5;
    HeomConfig cfg;
    cfg.depth = 8;
    cfg.integrator_dt = 0.01;
    const TimeGrid grid(0.1, 400);
    const auto heom = gen_heom(p, cfg, grid);
    const auto tensors = maps_to_tensors(extract_maps(heom.truncated(50)));
    Matrix rho0 = Matrix::Zero(2, 2);
    rho0(0, 0) = 1.0;
    const auto traj = propagate(tensors, 49, rho0, 400);
    const auto rep = detect_equilibrium(traj, 1e-6, 50);
    const auto ref = heom.evolve(rho0);
    Matrix tail = Matrix::Zero(2, 2);
    for (std::size_t k = 351; k <= 400; ++k) tail += ref[k];
    tail /= 50.0;
    CHECK((rep.rho_eq - tail).cwiseAbs().maxCoeff() < 5e-3);
}

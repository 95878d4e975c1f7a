// Serial vs OpenMP timings for the data-parallel kernels.

#include <random>

#include <benchmark/benchmark.h>

#include "ttm/generators.hpp"
#include "ttm/heom.hpp"
#include "ttm/kernels.hpp"

using namespace ttm;
using kernels::Exec;

namespace {

Matrix random_block(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(n(rng), n(rng));
    return m;
}

// Generator of a realistic hierarchy: depth from the benchmark argument, two Matsubara terms.
kernels::CsrMatrix hierarchy(int depth) {
    SpinBosonParams p;
    p.lambda = 1.0;
    p.gamma = 5.0;
    const auto exps = heom::drude_lorentz_exponents(p.lambda, p.gamma, p.beta, 2);
    const heom::HierarchyIndex index(static_cast<int>(exps.size()), depth);
    return heom::build_generator(p.system_hamiltonian(), p.coupling_op, exps,
                                 heom::matsubara_residual(p.lambda, p.gamma, p.beta, 2), index);
}

void spmm(benchmark::State& state, Exec exec) {
    const auto a = hierarchy(static_cast<int>(state.range(0)));
    const Matrix x = random_block(a.cols, 4, 1);
    Matrix y;
    for (auto _ : state) {
        kernels::spmm(a, x, y, exec);
        benchmark::DoNotOptimize(y.data());
    }
    state.counters["rows"] = static_cast<double>(a.rows);
    state.counters["nnz"] = static_cast<double>(a.nnz());
}

void ttm_step(benchmark::State& state, Exec exec) {
    const auto k = static_cast<Eigen::Index>(state.range(0));
    const Eigen::Index n = 4;
    std::vector<Matrix> tensors;
    for (Eigen::Index s = 0; s < k; ++s) tensors.push_back(random_block(n, n, 10 + static_cast<std::uint64_t>(s)));
    const Matrix ring = random_block(n, k, 2);
    LiouvilleVector out;
    for (auto _ : state) {
        kernels::ttm_step(tensors, ring, 0, k, out, exec);
        benchmark::DoNotOptimize(out.data());
    }
}

void heom_propagation(benchmark::State& state, Exec exec) {
    const auto a = hierarchy(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto maps = heom::propagate_maps(a, 2, TimeGrid(0.05, 20), 0.005, exec);
        benchmark::DoNotOptimize(maps.back().data());
    }
}

}  // namespace

BENCHMARK_CAPTURE(spmm, serial, Exec::serial)->Arg(6)->Arg(10)->Arg(14);
BENCHMARK_CAPTURE(spmm, parallel, Exec::parallel)->Arg(6)->Arg(10)->Arg(14);
BENCHMARK_CAPTURE(ttm_step, serial, Exec::serial)->Arg(50)->Arg(500);
BENCHMARK_CAPTURE(ttm_step, parallel, Exec::parallel)->Arg(50)->Arg(500);
BENCHMARK_CAPTURE(heom_propagation, serial, Exec::serial)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(heom_propagation, parallel, Exec::parallel)->Arg(10)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
